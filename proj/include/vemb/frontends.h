// Copyright (c) 2026 The vemb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VEMB_FRONTENDS_H_
#define VEMB_FRONTENDS_H_

#include <cstddef>
#include <vector>

#include "vemb/audio.h"
#include "vemb/matrix.h"

namespace vemb {

struct CqtConfig {
  int sample_rate = 24000;
  int octaves = 8;
  int bins_per_octave = 64;
  double min_frequency = 32.7;  // C1
  double block_seconds = 1.0;
  int frames_per_block = 32;
  // Analysis window length in periods of the bin frequency; fixes Q.
  double window_periods = 16.0;

  int bins() const { return octaves * bins_per_octave; }
  double BinFrequency(int k) const;
};

struct ComplexSpectrogram {
  Matrix real;  // [bins x frames]
  Matrix imag;
  double min_frequency = 0.0;
  double block_length_seconds = 0.0;

  std::size_t bins() const { return real.rows; }
  std::size_t frames() const { return real.cols; }
  double Magnitude(std::size_t bin, std::size_t frame) const;
};

struct MelConfig {
  int sample_rate = 24000;
  int fft_size = 1201;
  int win_length = 1201;
  int hop_length = 600;
  int n_mels = 128;
  double f_min = 0.0;
  double f_max = 0.0;  // 0 means Nyquist
  double log_floor = 1e-10;
};

struct MelSpectrogram {
  Matrix values;  // [n_mels x frames], natural-log power
  int fft_size = 0;
  int win_length = 0;
  int hop_length = 0;

  std::size_t n_mels() const { return values.rows; }
  std::size_t frames() const { return values.cols; }
};

struct PitchConfig {
  int sample_rate = 24000;
  double frame_period_seconds = 0.005;
  double f0_floor = 70.0;
  double f0_ceil = 400.0;
  double channels_per_octave = 2.0;
  int analysis_rate = 4000;
  // Maximum relative spread of the four interval estimates for a voiced
  // frame.
  double stability_threshold = 0.05;
  // Voiced runs shorter than this many frames are dropped.
  int min_voiced_run = 5;
};

struct PitchContour {
  std::vector<double> f0;  // Hz, 0 where unvoiced
  std::vector<bool> voiced;
  double hop_seconds = 0.005;

  std::size_t frames() const { return f0.size(); }
};

struct CwtConfig {
  // Integer scales 1..36 by default.
  std::vector<double> scales = DefaultScales();

  static std::vector<double> DefaultScales(int count = 36);
};

struct PitchSpectrogram {
  Matrix coeffs;  // [scales x frames]
  std::vector<double> scale_values;
};

// Constant-Q analysis applied independently to each block and concatenated
// along time. Each octave is computed after repeated halving of the sample
// rate so every bin's Hann-windowed kernel spans `window_periods` periods.
ComplexSpectrogram Cqt(const Waveform& w, const CqtConfig& cfg = {});

MelSpectrogram ComputeMelSpectrogram(const Waveform& w,
                                     const MelConfig& cfg = {});
// Area-normalized triangular filters on the Slaney mel scale,
// [n_mels x (fft_size / 2 + 1)].
Matrix MelFilterbank(const MelConfig& cfg);
// Mel filter centre frequencies in Hz.
std::vector<double> MelCenterFrequencies(const MelConfig& cfg);
std::size_t MelFrameCount(std::size_t samples, int hop_length);

PitchContour EstimatePitch(const Waveform& w, const PitchConfig& cfg = {});
std::size_t PitchFrameCount(std::size_t samples, int sample_rate,
                            double frame_period_seconds);

// Fills unvoiced gaps by log-F0 interpolation and holds the edges. Throws
// kInvalidArgument when no frame is voiced.
PitchContour ContinueContour(const PitchContour& c);

// Mexican-hat CWT of the z-normalized log-F0 of a continuous contour.
PitchSpectrogram CwtPitch(const PitchContour& c, const CwtConfig& cfg = {});
// Same transform on an arbitrary sequence (no normalization).
Matrix MexicanHatCwt(const std::vector<double>& x,
                     const std::vector<double>& scales);

}  // namespace vemb

#endif  // VEMB_FRONTENDS_H_
