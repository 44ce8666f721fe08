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

#include "vemb/frontends.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "vemb/dsp.h"
#include "vemb/error.h"

namespace vemb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Highest frequency an octave may reach relative to its (decimated) rate.
constexpr double kMaxRelativeFrequency = 0.36;

struct CqtKernel {
  int level = 0;  // number of rate halvings
  std::vector<std::complex<double>> taps;
};

std::vector<CqtKernel> BuildCqtKernels(const CqtConfig& cfg) {
  std::vector<CqtKernel> kernels(cfg.bins());
  for (int o = 0; o < cfg.octaves; ++o) {
    const double octave_top = cfg.min_frequency * std::pow(2.0, o + 1);
    int level = 0;
    while (octave_top <= kMaxRelativeFrequency * cfg.sample_rate /
                             std::pow(2.0, level + 1)) {
      ++level;
    }
    const double rate = cfg.sample_rate / std::pow(2.0, level);
    for (int b = 0; b < cfg.bins_per_octave; ++b) {
      const int k = o * cfg.bins_per_octave + b;
      const double f = cfg.BinFrequency(k);
      const auto n = static_cast<std::size_t>(
          std::max(2L, std::lround(cfg.window_periods * rate / f)));
      CqtKernel& kern = kernels[k];
      kern.level = level;
      kern.taps.resize(n);
      double wsum = 0.0;
      std::vector<double> win(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sin(std::numbers::pi * (i + 0.5) / n);
        win[i] = s * s;
        wsum += win[i];
      }
      const double mid = (static_cast<double>(n) - 1.0) / 2.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double phase = -kTwoPi * f * (static_cast<double>(i) - mid) / rate;
        kern.taps[i] = std::polar(win[i] / wsum, phase);
      }
    }
  }
  return kernels;
}

// Zero-crossing events of one filtered band: interval frequencies and their
// midpoints (seconds).
struct IntervalSeries {
  std::vector<double> locations;
  std::vector<double> frequencies;
};

IntervalSeries NegativeGoingCrossings(const std::vector<double>& x, double fs) {
  std::vector<double> edges;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i] > 0.0 && x[i + 1] <= 0.0) {
      edges.push_back(static_cast<double>(i) + x[i] / (x[i] - x[i + 1]));
    }
  }
  IntervalSeries s;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    s.frequencies.push_back(fs / (edges[i + 1] - edges[i]));
    s.locations.push_back((edges[i] + edges[i + 1]) / 2.0 / fs);
  }
  return s;
}

// Linear interpolation with the end values held outside the sampled range.
double Interpolate(const IntervalSeries& s, double t) {
  const auto& x = s.locations;
  if (t <= x.front()) return s.frequencies.front();
  if (t >= x.back()) return s.frequencies.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(x.begin(), x.end(), t) - x.begin());
  const std::size_t lo = hi - 1;
  const double a = (t - x[lo]) / (x[hi] - x[lo]);
  return s.frequencies[lo] + a * (s.frequencies[hi] - s.frequencies[lo]);
}

}  // namespace

double CqtConfig::BinFrequency(int k) const {
  return min_frequency * std::pow(2.0, static_cast<double>(k) / bins_per_octave);
}

double ComplexSpectrogram::Magnitude(std::size_t bin, std::size_t frame) const {
  return std::hypot(real(bin, frame), imag(bin, frame));
}

ComplexSpectrogram Cqt(const Waveform& w, const CqtConfig& cfg) {
  ValidateWaveform(w);
  Check(cfg.octaves > 0 && cfg.bins_per_octave > 0 && cfg.min_frequency > 0 &&
            cfg.frames_per_block > 0 && cfg.window_periods > 0,
        ErrorCode::kInvalidArgument, "invalid CQT configuration");
  Check(w.sample_rate == cfg.sample_rate, ErrorCode::kInvalidArgument,
        "CQT expects " + std::to_string(cfg.sample_rate) + " Hz input");
  Check(cfg.BinFrequency(cfg.bins() - 1) < 0.5 * cfg.sample_rate,
        ErrorCode::kInvalidArgument, "CQT top bin above Nyquist");
  const auto block = static_cast<std::size_t>(
      std::llround(cfg.block_seconds * cfg.sample_rate));
  Check(block > 0 && w.samples.size() >= block, ErrorCode::kInvalidArgument,
        "CQT input shorter than one block");
  Check(w.samples.size() % block == 0, ErrorCode::kInvalidArgument,
        "CQT input length must be a whole number of blocks");

  const std::size_t blocks = w.samples.size() / block;
  const auto per_block = static_cast<std::size_t>(cfg.frames_per_block);
  const auto kernels = BuildCqtKernels(cfg);
  int max_level = 0;
  for (const auto& k : kernels) max_level = std::max(max_level, k.level);

  ComplexSpectrogram out;
  out.real = Matrix(cfg.bins(), blocks * per_block);
  out.imag = Matrix(cfg.bins(), blocks * per_block);
  out.min_frequency = cfg.min_frequency;
  out.block_length_seconds = cfg.block_seconds;

  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<std::vector<double>> levels;
    levels.emplace_back(w.samples.begin() + b * block,
                        w.samples.begin() + (b + 1) * block);
    for (int l = 1; l <= max_level; ++l) {
      levels.push_back(dsp::DecimateByTwo(levels.back()));
    }
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      const CqtKernel& kern = kernels[k];
      const auto& x = levels[kern.level];
      const double factor = std::pow(2.0, kern.level);
      const auto n = static_cast<std::ptrdiff_t>(kern.taps.size());
      for (std::size_t m = 0; m < per_block; ++m) {
        const double centre = (m + 0.5) * static_cast<double>(block) / per_block;
        const std::ptrdiff_t start =
            static_cast<std::ptrdiff_t>(std::lround(centre / factor)) - n / 2;
        std::complex<double> acc = 0.0;
        for (std::ptrdiff_t i = 0; i < n; ++i) {
          const std::ptrdiff_t idx = start + i;
          if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(x.size())) continue;
          acc += x[idx] * kern.taps[i];
        }
        out.real(k, b * per_block + m) = acc.real();
        out.imag(k, b * per_block + m) = acc.imag();
      }
    }
  }
  return out;
}

std::size_t MelFrameCount(std::size_t samples, int hop_length) {
  return samples / static_cast<std::size_t>(hop_length) + 1;
}

Matrix MelFilterbank(const MelConfig& cfg) {
  const std::size_t n_freqs = cfg.fft_size / 2 + 1;
  const double f_max = cfg.f_max > 0 ? cfg.f_max : cfg.sample_rate / 2.0;
  const double mel_lo = dsp::HzToMel(cfg.f_min);
  const double mel_hi = dsp::HzToMel(f_max);
  std::vector<double> hz(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    hz[i] = dsp::MelToHz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
  }
  Matrix fb(cfg.n_mels, n_freqs);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double area = 2.0 / (hz[m + 2] - hz[m]);
    for (std::size_t j = 0; j < n_freqs; ++j) {
      const double f = static_cast<double>(j) * cfg.sample_rate / cfg.fft_size;
      const double lower = (f - hz[m]) / (hz[m + 1] - hz[m]);
      const double upper = (hz[m + 2] - f) / (hz[m + 2] - hz[m + 1]);
      fb(m, j) = std::max(0.0, std::min(lower, upper)) * area;
    }
  }
  return fb;
}

std::vector<double> MelCenterFrequencies(const MelConfig& cfg) {
  const double f_max = cfg.f_max > 0 ? cfg.f_max : cfg.sample_rate / 2.0;
  const double mel_lo = dsp::HzToMel(cfg.f_min);
  const double mel_hi = dsp::HzToMel(f_max);
  std::vector<double> c(cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    c[m] = dsp::MelToHz(mel_lo + (mel_hi - mel_lo) * (m + 1) / (cfg.n_mels + 1));
  }
  return c;
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const MelConfig& cfg) {
  ValidateWaveform(w);
  Check(w.sample_rate == cfg.sample_rate, ErrorCode::kInvalidArgument,
        "mel spectrogram expects " + std::to_string(cfg.sample_rate) +
            " Hz input");
  Check(cfg.fft_size > 0 && cfg.hop_length > 0 && cfg.n_mels > 0 &&
            cfg.win_length > 0 && cfg.win_length <= cfg.fft_size,
        ErrorCode::kInvalidArgument, "invalid mel configuration");

  const std::size_t len = w.samples.size();
  const std::size_t frames = MelFrameCount(len, cfg.hop_length);
  const Matrix fb = MelFilterbank(cfg);
  const std::vector<double> window = dsp::HannPeriodic(cfg.win_length);
  const std::size_t win_offset = (cfg.fft_size - cfg.win_length) / 2;
  const std::ptrdiff_t left = cfg.fft_size / 2;

  MelSpectrogram out;
  out.values = Matrix(cfg.n_mels, frames);
  out.fft_size = cfg.fft_size;
  out.win_length = cfg.win_length;
  out.hop_length = cfg.hop_length;

  std::vector<double> frame(cfg.fft_size);
  std::vector<double> power(cfg.fft_size / 2 + 1);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(frame.begin(), frame.end(), 0.0);
    const std::ptrdiff_t start =
        static_cast<std::ptrdiff_t>(t * cfg.hop_length) - left;
    for (int i = 0; i < cfg.win_length; ++i) {
      const std::ptrdiff_t src = start + static_cast<std::ptrdiff_t>(win_offset) + i;
      frame[win_offset + i] = window[i] * w.samples[dsp::ReflectIndex(src, len)];
    }
    const auto spec = dsp::RealDft(frame);
    for (std::size_t j = 0; j < power.size(); ++j) power[j] = std::norm(spec[j]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t j = 0; j < power.size(); ++j) e += fb(m, j) * power[j];
      out.values(m, t) = std::log(std::max(e, cfg.log_floor));
    }
  }
  return out;
}

std::size_t PitchFrameCount(std::size_t samples, int sample_rate,
                            double frame_period_seconds) {
  const double duration = static_cast<double>(samples) / sample_rate;
  return static_cast<std::size_t>(std::floor(duration / frame_period_seconds + 1e-9)) + 1;
}

PitchContour EstimatePitch(const Waveform& w, const PitchConfig& cfg) {
  ValidateWaveform(w);
  Check(w.sample_rate == cfg.sample_rate, ErrorCode::kInvalidArgument,
        "pitch estimation expects " + std::to_string(cfg.sample_rate) +
            " Hz input");
  Check(cfg.f0_floor > 0 && cfg.f0_ceil > cfg.f0_floor &&
            cfg.frame_period_seconds > 0 && cfg.channels_per_octave > 0,
        ErrorCode::kInvalidArgument, "invalid pitch configuration");

  const std::size_t frames =
      PitchFrameCount(w.samples.size(), w.sample_rate, cfg.frame_period_seconds);
  PitchContour out;
  out.hop_seconds = cfg.frame_period_seconds;
  out.f0.assign(frames, 0.0);
  out.voiced.assign(frames, false);

  Waveform analysis = Resample(w, cfg.analysis_rate);
  std::vector<double>& x = analysis.samples;
  const double fs = analysis.sample_rate;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double energy = 0.0;
  for (double& v : x) {
    v -= mean;
    energy += v * v;
  }
  if (energy <= 0.0) return out;

  const int bands = static_cast<int>(std::ceil(
      std::log2(cfg.f0_ceil / cfg.f0_floor) * cfg.channels_per_octave));
  std::vector<double> best_score(frames, std::numeric_limits<double>::infinity());
  std::vector<double> best_f0(frames, 0.0);

  for (int band = 0; band <= bands; ++band) {
    const double boundary =
        cfg.f0_floor * std::pow(2.0, band / cfg.channels_per_octave);
    const auto half = static_cast<std::ptrdiff_t>(std::lround(fs / boundary / 2.0));
    const std::vector<double> win = dsp::Nuttall(static_cast<std::size_t>(4 * half));
    const auto delay = 2 * half;
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    std::vector<double> y(x.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(win.size()); ++j) {
        const std::ptrdiff_t k = i + delay - j;
        if (k >= 0 && k < n) acc += win[j] * x[k];
      }
      y[i] = acc;
    }
    std::vector<double> neg_y(y.size()), dy(y.size() - 1), neg_dy(y.size() - 1);
    for (std::size_t i = 0; i < y.size(); ++i) neg_y[i] = -y[i];
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      dy[i] = y[i] - y[i + 1];
      neg_dy[i] = -dy[i];
    }
    const IntervalSeries series[4] = {
        NegativeGoingCrossings(y, fs), NegativeGoingCrossings(neg_y, fs),
        NegativeGoingCrossings(dy, fs), NegativeGoingCrossings(neg_dy, fs)};
    bool usable = true;
    for (const auto& s : series) usable = usable && s.frequencies.size() >= 2;
    if (!usable) continue;

    for (std::size_t f = 0; f < frames; ++f) {
      const double t = f * cfg.frame_period_seconds;
      double est[4];
      double m = 0.0;
      for (int s = 0; s < 4; ++s) {
        est[s] = Interpolate(series[s], t);
        m += est[s];
      }
      m /= 4.0;
      if (m > boundary || m < boundary / 2.0 || m > cfg.f0_ceil ||
          m < cfg.f0_floor) {
        continue;
      }
      double var = 0.0;
      for (double e : est) var += (e - m) * (e - m);
      const double score = std::sqrt(var / 3.0) / m;
      if (score < best_score[f]) {
        best_score[f] = score;
        best_f0[f] = m;
      }
    }
  }

  for (std::size_t f = 0; f < frames; ++f) {
    if (best_score[f] < cfg.stability_threshold) {
      out.f0[f] = best_f0[f];
      out.voiced[f] = true;
    }
  }
  // Drop short voiced runs.
  std::size_t f = 0;
  while (f < frames) {
    if (!out.voiced[f]) {
      ++f;
      continue;
    }
    std::size_t end = f;
    while (end < frames && out.voiced[end]) ++end;
    if (end - f < static_cast<std::size_t>(cfg.min_voiced_run)) {
      for (std::size_t i = f; i < end; ++i) {
        out.voiced[i] = false;
        out.f0[i] = 0.0;
      }
    }
    f = end;
  }
  return out;
}

PitchContour ContinueContour(const PitchContour& c) {
  Check(c.f0.size() == c.voiced.size(), ErrorCode::kInvalidArgument,
        "pitch contour arrays differ in length");
  std::vector<std::size_t> voiced;
  for (std::size_t i = 0; i < c.frames(); ++i) {
    if (c.voiced[i]) {
      Check(c.f0[i] > 0.0, ErrorCode::kInvalidArgument,
            "voiced frame with non-positive F0");
      voiced.push_back(i);
    }
  }
  Check(!voiced.empty(), ErrorCode::kInvalidArgument,
        "cannot continue a fully unvoiced contour");
  PitchContour out = c;
  for (std::size_t i = 0; i < voiced.front(); ++i) out.f0[i] = c.f0[voiced.front()];
  for (std::size_t i = voiced.back() + 1; i < c.frames(); ++i) {
    out.f0[i] = c.f0[voiced.back()];
  }
  for (std::size_t v = 0; v + 1 < voiced.size(); ++v) {
    const std::size_t a = voiced[v], b = voiced[v + 1];
    if (b == a + 1) continue;
    const double la = std::log(c.f0[a]), lb = std::log(c.f0[b]);
    for (std::size_t i = a + 1; i < b; ++i) {
      const double frac = static_cast<double>(i - a) / static_cast<double>(b - a);
      out.f0[i] = std::exp(la + frac * (lb - la));
    }
  }
  out.voiced.assign(c.frames(), true);
  return out;
}

std::vector<double> CwtConfig::DefaultScales(int count) {
  std::vector<double> s(count);
  for (int i = 0; i < count; ++i) s[i] = i + 1.0;
  return s;
}

Matrix MexicanHatCwt(const std::vector<double>& x,
                     const std::vector<double>& scales) {
  Check(!x.empty(), ErrorCode::kInvalidArgument, "CWT of empty sequence");
  const double norm = 2.0 / (std::sqrt(3.0) * std::pow(std::numbers::pi, 0.25));
  Matrix out(scales.size(), x.size());
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const double s = scales[si];
    Check(s > 0, ErrorCode::kInvalidArgument, "CWT scales must be positive");
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(5.0 * s));
    std::vector<double> taps(2 * reach + 1);
    double mean = 0.0;
    for (std::ptrdiff_t k = -reach; k <= reach; ++k) {
      const double t = static_cast<double>(k) / s;
      taps[k + reach] = norm * (1.0 - t * t) * std::exp(-0.5 * t * t) / std::sqrt(s);
      mean += taps[k + reach];
    }
    // Exact zero sum so constants are annihilated.
    mean /= static_cast<double>(taps.size());
    for (double& v : taps) v -= mean;
    for (std::size_t t = 0; t < x.size(); ++t) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -reach; k <= reach; ++k) {
        acc += taps[k + reach] *
               x[dsp::ReflectIndex(static_cast<std::ptrdiff_t>(t) + k, x.size())];
      }
      out(si, t) = acc;
    }
  }
  return out;
}

PitchSpectrogram CwtPitch(const PitchContour& c, const CwtConfig& cfg) {
  Check(c.frames() > 0, ErrorCode::kInvalidArgument, "empty pitch contour");
  Check(!cfg.scales.empty(), ErrorCode::kInvalidArgument, "no CWT scales");
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    Check(cfg.scales[i] >= 1.0 && cfg.scales[i] <= 37.0,
          ErrorCode::kInvalidArgument, "CWT scales must lie in [1, 37]");
    Check(i == 0 || cfg.scales[i] > cfg.scales[i - 1],
          ErrorCode::kInvalidArgument, "CWT scales must be strictly increasing");
  }
  std::vector<double> logf(c.frames());
  for (std::size_t i = 0; i < c.frames(); ++i) {
    Check(c.voiced[i] && c.f0[i] > 0.0, ErrorCode::kInvalidArgument,
          "CWT needs a continuous contour (run ContinueContour first)");
    logf[i] = std::log(c.f0[i]);
  }
  double mean = 0.0;
  for (double v : logf) mean += v;
  mean /= static_cast<double>(logf.size());
  double var = 0.0;
  for (double v : logf) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(logf.size()));
  for (double& v : logf) v = sd > 1e-12 ? (v - mean) / sd : 0.0;

  PitchSpectrogram out;
  out.coeffs = MexicanHatCwt(logf, cfg.scales);
  out.scale_values = cfg.scales;
  return out;
}

}  // namespace vemb
