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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.h"
#include "vemb/audio.h"
#include "vemb/error.h"

using namespace vemb;
using vemb::testing::DftPeakHz;
using vemb::testing::TempDir;
using vemb::testing::Tone;

namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected vemb::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("load_wav: silence, stereo downmix and a 440 Hz tone") {
  const auto dir = TempDir("audio");
  {
    Waveform silence;
    silence.sample_rate = 16000;
    silence.samples.assign(16000, 0.0);
    SaveWav((dir / "silence.wav").string(), silence, WavEncoding::kPcm16);
    Waveform w = LoadWav((dir / "silence.wav").string());
    CHECK(w.sample_rate == 16000);
    REQUIRE(w.samples.size() == 16000);
    for (double s : w.samples) CHECK(s == 0.0);
  }
  {
    std::vector<double> inter;
    for (int i = 0; i < 8000; ++i) {
      inter.push_back(0.5);
      inter.push_back(-0.5);
    }
    SaveWavInterleaved((dir / "stereo.wav").string(), inter, 2, 8000,
                       WavEncoding::kPcm16);
    Waveform w = LoadWav((dir / "stereo.wav").string());
    REQUIRE(w.samples.size() == 8000);
    for (double s : w.samples) CHECK(s == 0.0);
  }
  {
    Waveform tone = Tone(440.0, 2.0, 48000);
    SaveWav((dir / "tone.wav").string(), tone, WavEncoding::kPcm16);
    Waveform w = LoadWav((dir / "tone.wav").string());
    CHECK(w.sample_rate == 48000);
    REQUIRE(w.samples.size() == 96000);
    CHECK(DftPeakHz(w.samples, 48000, 400.0, 480.0, 1.0) == 440.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_wav: float32 samples survive exactly") {
  const auto dir = TempDir("audio_f32");
  Waveform w;
  w.sample_rate = 22050;
  w.samples = {0.0, 0.25, -0.5, 0.75, -1.0};
  SaveWav((dir / "f.wav").string(), w, WavEncoding::kFloat32);
  Waveform r = LoadWav((dir / "f.wav").string());
  CHECK(r.sample_rate == 22050);
  CHECK(r.samples == w.samples);
  std::filesystem::remove_all(dir);
}

TEST_CASE("load_wav: each failure has its own error code") {
  const auto dir = TempDir("audio_err");
  CHECK(CodeOf([&] { LoadWav((dir / "missing.wav").string()); }) ==
        ErrorCode::kUnreadableFile);

  {
    std::ofstream((dir / "junk.wav").string()) << "definitely not a wave file";
  }
  CHECK(CodeOf([&] { LoadWav((dir / "junk.wav").string()); }) ==
        ErrorCode::kUnreadableFile);

  // 24-bit PCM header.
  {
    Waveform w;
    w.sample_rate = 8000;
    w.samples.assign(10, 0.1);
    SaveWav((dir / "pcm24.wav").string(), w, WavEncoding::kPcm16);
    std::fstream f((dir / "pcm24.wav").string(),
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(34);
    const char bits24[2] = {24, 0};
    f.write(bits24, 2);
  }
  CHECK(CodeOf([&] { LoadWav((dir / "pcm24.wav").string()); }) ==
        ErrorCode::kUnsupportedCodec);

  SaveWavInterleaved((dir / "empty.wav").string(), {}, 1, 8000,
                     WavEncoding::kPcm16);
  CHECK(CodeOf([&] { LoadWav((dir / "empty.wav").string()); }) ==
        ErrorCode::kEmptyAudio);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resample: identity, length ratio and tone preservation") {
  Waveform w = Tone(300.0, 2.0, 48000);
  Waveform same = Resample(w, 48000);
  CHECK(same.samples == w.samples);

  Waveform down = Resample(w, 24000);
  CHECK(down.sample_rate == 24000);
  CHECK(down.samples.size() == 48000);
  // One DFT bin at 2 s is 0.5 Hz.
  CHECK(std::abs(DftPeakHz(down.samples, 24000, 290.0, 310.0, 0.5) - 300.0) <=
        0.5);
}

TEST_CASE("resample: output length is round(len * target / source)") {
  for (int src : {8000, 16000, 22050, 44100, 48000}) {
    for (std::size_t len : {1u, 7u, 1000u, 12345u}) {
      Waveform w;
      w.sample_rate = src;
      w.samples.assign(len, 0.1);
      const auto expected = static_cast<std::size_t>(
          std::llround(static_cast<double>(len) * 24000 / src));
      CHECK(Resample(w, 24000).samples.size() == expected);
    }
  }
}

TEST_CASE("resample: rate idempotence is bit-exact") {
  for (int src : {16000, 44100}) {
    Waveform w = vemb::testing::WhiteNoise(0.25, src, 9);
    Waveform once = Resample(w, 24000);
    Waveform twice = Resample(once, 24000);
    CHECK(once.samples == twice.samples);
  }
}

TEST_CASE("resample: tones below 0.45 x min rate stay within one bin") {
  const std::vector<std::pair<int, int>> pairs = {
      {48000, 24000}, {16000, 24000}, {44100, 24000}, {22050, 24000}};
  std::mt19937_64 rng(3);
  for (auto [src, dst] : pairs) {
    const double limit = 0.45 * std::min(src, dst);
    std::uniform_real_distribution<double> pick(50.0, limit);
    for (int trial = 0; trial < 3; ++trial) {
      const double hz = std::round(pick(rng));
      Waveform out = Resample(Tone(hz, 0.5, src), dst);
      const double bin = static_cast<double>(dst) / out.samples.size();
      const double peak = DftPeakHz(out.samples, dst, hz - 5 * bin,
                                    hz + 5 * bin, bin / 4);
      CHECK_MESSAGE(std::abs(peak - hz) <= bin,
                    src << "->" << dst << " tone " << hz << " peak " << peak);
    }
  }
}

TEST_CASE("random_segment: offsets, tiling and exact length") {
  SegmentSpec spec;
  Waveform exact;
  exact.sample_rate = 24000;
  exact.samples.resize(96000);
  for (std::size_t i = 0; i < exact.samples.size(); ++i) {
    exact.samples[i] = static_cast<double>(i) / 96000.0;
  }
  for (std::uint64_t seed : {0u, 1u, 77u}) {
    spec.seed = seed;
    CHECK(RandomSegment(exact, spec).samples == exact.samples);
  }

  Waveform plus_one = exact;
  plus_one.samples.push_back(1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    Waveform a = RandomSegment(plus_one, spec);
    Waveform b = RandomSegment(plus_one, spec);
    CHECK(a.samples == b.samples);
    const bool at0 = a.samples.front() == plus_one.samples[0];
    const bool at1 = a.samples.front() == plus_one.samples[1];
    CHECK((at0 || at1));
  }

  Waveform short_clip;
  short_clip.sample_rate = 24000;
  short_clip.samples.resize(24000);
  for (std::size_t i = 0; i < short_clip.samples.size(); ++i) {
    short_clip.samples[i] = static_cast<double>(i + 1);
  }
  spec.seed = 5;
  Waveform tiled = RandomSegment(short_clip, spec);
  REQUIRE(tiled.samples.size() == 96000);
  const auto phase = static_cast<std::size_t>(tiled.samples[0] - 1.0);
  for (std::size_t i = 0; i < tiled.samples.size(); ++i) {
    REQUIRE(tiled.samples[i] == short_clip.samples[(phase + i) % 24000]);
  }

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Waveform w;
    w.sample_rate = 24000;
    w.samples.assign(1 + rng() % 200000, 0.01);
    spec.seed = rng();
    CHECK(RandomSegment(w, spec).samples.size() == 96000);
  }
}

TEST_CASE("random_segment: input must already be at the target rate") {
  Waveform w = Tone(100.0, 5.0, 16000);
  CHECK_THROWS_AS(RandomSegment(w, SegmentSpec{}), Error);
}

TEST_CASE("segment seeds differ across epochs and items") {
  CHECK(SegmentSeed(1, 0, 0) != SegmentSeed(1, 1, 0));
  CHECK(SegmentSeed(1, 0, 0) != SegmentSeed(1, 0, 1));
  CHECK(SegmentSeed(1, 2, 3) == SegmentSeed(1, 2, 3));
}
