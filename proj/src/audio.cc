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

#include "vemb/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <memory>
#include <numeric>
#include <random>

#include "vemb/error.h"

namespace vemb {

namespace {

constexpr double kKaiserBeta = 8.6;
constexpr int kTapsPerPhase = 64;
constexpr double kRolloff = 0.95;

std::uint32_t ReadU32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

struct ResampleKernel {
  int up = 1;     // L
  int down = 1;   // M
  int half = 0;   // taps on each side of the centre, in input samples
  std::vector<double> table;  // [phase][2 * half]
};

// Filter taps for every output phase of an L/M rational resampler.
std::shared_ptr<const ResampleKernel> BuildKernel(int up, int down) {
  auto k = std::make_shared<ResampleKernel>();
  k->up = up;
  k->down = down;
  // Cutoff relative to the input Nyquist.
  const double ratio = std::min(1.0, static_cast<double>(up) / down);
  const double fc = kRolloff * ratio;
  // 64 taps at the lower of the two rates.
  k->half = static_cast<int>(std::ceil((kTapsPerPhase / 2) / ratio));
  const int width = 2 * k->half;
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  k->table.assign(static_cast<std::size_t>(up) * width, 0.0);
  for (int p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;  // output sits at k0 + frac
    double* row = k->table.data() + static_cast<std::size_t>(p) * width;
    for (int j = 0; j < width; ++j) {
      // tap j multiplies x[k0 - half + 1 + j]
      const double tau = frac - static_cast<double>(j - k->half + 1);
      const double x = tau / k->half;
      if (std::abs(x) >= 1.0) continue;
      const double arg = M_PI * fc * tau;
      const double sinc = tau == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double win =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - x * x)) / i0_beta;
      row[j] = fc * sinc * win;
    }
  }
  return k;
}

std::shared_ptr<const ResampleKernel> KernelFor(int up, int down) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const ResampleKernel>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{up, down}];
  if (!slot) slot = BuildKernel(up, down);
  return slot;
}

}  // namespace

void ValidateWaveform(const Waveform& w) {
  Check(w.sample_rate > 0, ErrorCode::kInvalidArgument,
        "sample rate must be positive");
  Check(!w.samples.empty(), ErrorCode::kInvalidArgument, "empty waveform");
  for (double s : w.samples) {
    Check(std::isfinite(s), ErrorCode::kInvalidArgument,
          "waveform contains a non-finite sample");
  }
}

std::size_t SegmentSpec::length() const {
  Check(duration_seconds > 0.0 && target_rate > 0, ErrorCode::kInvalidArgument,
        "segment duration and rate must be positive");
  return static_cast<std::size_t>(std::llround(duration_seconds * target_rate));
}

Waveform LoadWav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  Check(static_cast<bool>(is), ErrorCode::kUnreadableFile,
        "cannot open '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  Check(buf.size() >= 12 && std::memcmp(buf.data(), "RIFF", 4) == 0 &&
            std::memcmp(buf.data() + 8, "WAVE", 4) == 0,
        ErrorCode::kUnreadableFile, "'" + path + "' is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::uint32_t len = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = buf.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Check(len >= 16 && avail >= 16, ErrorCode::kUnreadableFile,
            "'" + path + "' has a short fmt chunk");
      format = ReadU16(buf.data() + body);
      channels = ReadU16(buf.data() + body + 2);
      rate = ReadU32(buf.data() + body + 4);
      bits = ReadU16(buf.data() + body + 14);
      if (format == 0xFFFE && len >= 26 && avail >= 26) {
        format = ReadU16(buf.data() + body + 24);  // sub-format GUID head
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = buf.data() + body;
      data_len = std::min<std::size_t>(len, avail);
      break;
    }
    pos = body + len + (len & 1);
  }
  Check(have_fmt && data != nullptr, ErrorCode::kUnreadableFile,
        "'" + path + "' is missing a fmt or data chunk");
  Check(channels >= 1 && rate > 0, ErrorCode::kUnreadableFile,
        "'" + path + "' declares no channels or a zero rate");
  const bool pcm16 = format == 1 && bits == 16;
  const bool float32 = format == 3 && bits == 32;
  Check(pcm16 || float32, ErrorCode::kUnsupportedCodec,
        "'" + path + "': only PCM16 and float32 are supported (format " +
            std::to_string(format) + ", " + std::to_string(bits) + " bits)");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_len / (bytes_per_sample * channels);
  Check(frames > 0, ErrorCode::kEmptyAudio, "'" + path + "' has no samples");

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (f * channels + c) * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(ReadU16(p)) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += std::clamp(static_cast<double>(v), -1.0, 1.0);
      }
    }
    w.samples[f] = acc / channels;
  }
  return w;
}

void SaveWavInterleaved(const std::string& path,
                        const std::vector<double>& interleaved, int channels,
                        int sample_rate, WavEncoding encoding) {
  Check(channels >= 1 && sample_rate > 0 && interleaved.size() % channels == 0,
        ErrorCode::kInvalidArgument, "bad WAV layout");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_len =
      static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  PutU32(out, 36 + data_len);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, pcm ? 1 : 3);
  PutU16(out, static_cast<std::uint16_t>(channels));
  PutU32(out, static_cast<std::uint32_t>(sample_rate));
  PutU32(out, static_cast<std::uint32_t>(sample_rate * channels * (bits / 8)));
  PutU16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  PutU16(out, bits);
  out += "data";
  PutU32(out, data_len);
  for (double s : interleaved) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (pcm) {
      const long q = std::lround(c * 32767.0);
      PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(c);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  }
  std::ofstream os(path, std::ios::binary);
  Check(static_cast<bool>(os), ErrorCode::kUnreadableFile,
        "cannot open '" + path + "' for writing");
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void SaveWav(const std::string& path, const Waveform& w, WavEncoding encoding,
             int channels) {
  std::vector<double> inter;
  inter.reserve(w.samples.size() * channels);
  for (double s : w.samples)
    for (int c = 0; c < channels; ++c) inter.push_back(s);
  SaveWavInterleaved(path, inter, channels, w.sample_rate, encoding);
}

Waveform Resample(const Waveform& w, int target_rate) {
  ValidateWaveform(w);
  Check(target_rate > 0, ErrorCode::kInvalidArgument,
        "target rate must be positive");
  if (w.sample_rate == target_rate) return w;

  const int g = std::gcd(w.sample_rate, target_rate);
  const int up = target_rate / g;
  const int down = w.sample_rate / g;
  auto kernel = KernelFor(up, down);
  const int width = 2 * kernel->half;

  const auto in_len = static_cast<std::int64_t>(w.samples.size());
  const auto out_len = static_cast<std::int64_t>(std::llround(
      static_cast<double>(in_len) * target_rate / w.sample_rate));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t k0 = pos / up;
    const int phase = static_cast<int>(pos % up);
    const double* taps =
        kernel->table.data() + static_cast<std::size_t>(phase) * width;
    const std::int64_t first = k0 - kernel->half + 1;
    const std::int64_t lo = std::max<std::int64_t>(0, first);
    const std::int64_t hi = std::min<std::int64_t>(in_len, first + width);
    double acc = 0.0;
    for (std::int64_t k = lo; k < hi; ++k) acc += taps[k - first] * w.samples[k];
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

Waveform RandomSegment(const Waveform& w, const SegmentSpec& spec) {
  ValidateWaveform(w);
  Check(w.sample_rate == spec.target_rate, ErrorCode::kInvalidArgument,
        "segment input must already be at " +
            std::to_string(spec.target_rate) + " Hz");
  const std::size_t need = spec.length();
  const std::size_t len = w.samples.size();
  std::mt19937_64 rng(spec.seed);
  Waveform out;
  out.sample_rate = w.sample_rate;
  if (len >= need) {
    std::uniform_int_distribution<std::size_t> pick(0, len - need);
    const std::size_t offset = pick(rng);
    out.samples.assign(w.samples.begin() + offset,
                       w.samples.begin() + offset + need);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, len - 1);
    const std::size_t phase = pick(rng);
    out.samples.resize(need);
    for (std::size_t i = 0; i < need; ++i) out.samples[i] = w.samples[(phase + i) % len];
  }
  return out;
}

std::uint64_t SegmentSeed(std::uint64_t base_seed, std::uint64_t epoch,
                          std::uint64_t index) {
  // splitmix64 over the packed triple
  std::uint64_t z = base_seed ^ (epoch * 0x9E3779B97F4A7C15ull) ^
                    (index * 0xBF58476D1CE4E5B9ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace vemb
