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

#ifndef VEMB_AUDIO_H_
#define VEMB_AUDIO_H_

#include <cstdint>
#include <string>
#include <vector>

namespace vemb {

// Mono signal with amplitudes in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Throws kInvalidArgument for a non-positive rate, an empty signal or a
// non-finite sample.
void ValidateWaveform(const Waveform& w);

struct SegmentSpec {
  double duration_seconds = 4.0;
  int target_rate = 24000;
  std::uint64_t seed = 0;

  std::size_t length() const;
};

enum class WavEncoding { kPcm16, kFloat32 };

// RIFF/WAVE reader for PCM 16-bit and IEEE float 32-bit. Channels are
// averaged. Errors: kUnreadableFile, kUnsupportedCodec, kEmptyAudio.
Waveform LoadWav(const std::string& path);
void SaveWav(const std::string& path, const Waveform& w,
             WavEncoding encoding = WavEncoding::kPcm16, int channels = 1);
// Interleaved multi-channel writer, used to build fixtures.
void SaveWavInterleaved(const std::string& path,
                        const std::vector<double>& interleaved, int channels,
                        int sample_rate, WavEncoding encoding);

// Band-limited windowed-sinc resampling (Kaiser, beta 8.6, 64 taps per
// phase). Output length is round(len * target / source). Equal rates return
// the input unchanged.
Waveform Resample(const Waveform& w, int target_rate);

// Fixed-length window at a seeded uniform offset; shorter inputs are tiled
// cyclically starting from a seeded phase.
Waveform RandomSegment(const Waveform& w, const SegmentSpec& spec);

// Seed for item `index` in `epoch`, so segments are re-drawn every epoch.
std::uint64_t SegmentSeed(std::uint64_t base_seed, std::uint64_t epoch,
                          std::uint64_t index);

}  // namespace vemb

#endif  // VEMB_AUDIO_H_
