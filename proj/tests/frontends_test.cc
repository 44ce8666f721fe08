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

#include <algorithm>
#include <cmath>

#include "test_util.h"
#include "vemb/error.h"
#include "vemb/frontends.h"

using namespace vemb;
using vemb::testing::HarmonicTone;
using vemb::testing::Tone;
using vemb::testing::WhiteNoise;

namespace {

std::size_t ArgmaxBin(const ComplexSpectrogram& s, std::size_t frame) {
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t b = 0; b < s.bins(); ++b) {
    const double m = s.Magnitude(b, frame);
    if (m > best_mag) {
      best_mag = m;
      best = b;
    }
  }
  return best;
}

// Slaney scale written out independently of the library.
double SlaneyMel(double hz) {
  return hz < 1000.0 ? 3.0 * hz / 200.0
                     : 15.0 + 27.0 * std::log(hz / 1000.0) / std::log(6.4);
}
double SlaneyHz(double mel) {
  return mel < 15.0 ? 200.0 * mel / 3.0
                    : 1000.0 * std::pow(6.4, (mel - 15.0) / 27.0);
}

PitchContour Contour(const std::vector<double>& f0) {
  PitchContour c;
  c.f0 = f0;
  for (double v : f0) c.voiced.push_back(v > 0.0);
  return c;
}

}  // namespace

TEST_CASE("cqt: 512 bins, frames from blocks, zero input") {
  CqtConfig cfg;
  CHECK(cfg.bins() == 512);
  Waveform zero;
  zero.sample_rate = 24000;
  zero.samples.assign(96000, 0.0);
  ComplexSpectrogram s = Cqt(zero, cfg);
  CHECK(s.bins() == 512);
  CHECK(s.frames() == 4u * static_cast<std::size_t>(cfg.frames_per_block));
  CHECK(s.real.rows == s.imag.rows);
  CHECK(s.real.cols == s.imag.cols);
  for (double v : s.real.data) REQUIRE(v == 0.0);
  for (double v : s.imag.data) REQUIRE(v == 0.0);
  CHECK(s.block_length_seconds == 1.0);
  CHECK(s.min_frequency == doctest::Approx(32.7));
}

TEST_CASE("cqt: bin centres are log spaced from C1") {
  CqtConfig cfg;
  for (int k : {0, 1, 63, 64, 300, 511}) {
    CHECK(cfg.BinFrequency(k) ==
          doctest::Approx(32.7 * std::pow(2.0, k / 64.0)).epsilon(1e-12));
  }
}

TEST_CASE("cqt: tone at a bin centre peaks at that bin in every frame") {
  CqtConfig cfg;
  for (int k : {5, 130, 257, 384, 505}) {
    Waveform w = Tone(cfg.BinFrequency(k), 2.0, 24000);
    ComplexSpectrogram s = Cqt(w, cfg);
    for (std::size_t m = 0; m < s.frames(); ++m) {
      const long am = static_cast<long>(ArgmaxBin(s, m));
      REQUIRE_MESSAGE(std::abs(am - k) <= 1, "bin " << k << " frame " << m);
    }
  }
}

TEST_CASE("cqt: linear in the input") {
  Waveform w = WhiteNoise(1.0, 24000, 4);
  Waveform scaled = w;
  const double a = -0.37;
  for (double& v : scaled.samples) v *= a;
  ComplexSpectrogram s = Cqt(w);
  ComplexSpectrogram t = Cqt(scaled);
  double max_abs = 0.0;
  for (double v : s.real.data) max_abs = std::max(max_abs, std::abs(v));
  for (std::size_t i = 0; i < s.real.data.size(); ++i) {
    REQUIRE(std::abs(t.real.data[i] - a * s.real.data[i]) <=
            1e-9 * std::abs(a) * max_abs);
    REQUIRE(std::abs(t.imag.data[i] - a * s.imag.data[i]) <=
            1e-9 * std::abs(a) * max_abs);
  }
}

TEST_CASE("cqt: -3 dB bandwidth over centre frequency is constant") {
  CqtConfig cfg;
  const std::size_t frame = 16;
  std::vector<double> ratios;
  for (int k : {20, 150, 280, 410, 500}) {
    const double f = cfg.BinFrequency(k);
    auto response = [&](double hz) {
      return Cqt(Tone(hz, 1.0, 24000), cfg).Magnitude(k, frame);
    };
    const double peak = response(f);
    auto edge = [&](double dir) {
      double lo = f, hi = f * (1.0 + 0.4 * dir);
      for (int i = 0; i < 24; ++i) {
        const double mid = 0.5 * (lo + hi);
        (response(mid) > peak / std::sqrt(2.0) ? lo : hi) = mid;
      }
      return lo;
    };
    ratios.push_back((edge(1.0) - edge(-1.0)) / f);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi <= 1.10 * *lo);
}

TEST_CASE("cqt: input must be whole blocks at the configured rate") {
  Waveform w = Tone(440.0, 0.5, 24000);
  CHECK_THROWS_AS(Cqt(w), Error);
  w = Tone(440.0, 1.5, 24000);
  CHECK_THROWS_AS(Cqt(w), Error);
  w = Tone(440.0, 1.0, 16000);
  CHECK_THROWS_AS(Cqt(w), Error);
}

TEST_CASE("mel: 161 frames of 128 filters for four seconds") {
  MelSpectrogram m = ComputeMelSpectrogram(Tone(300.0, 4.0, 24000));
  CHECK(m.n_mels() == 128);
  CHECK(m.frames() == 161);
  CHECK(m.fft_size == 1201);
  CHECK(m.win_length == 1201);
  CHECK(m.hop_length == 600);
  for (double v : m.values.data) REQUIRE(std::isfinite(v));
}

TEST_CASE("mel: zero input sits on the log floor") {
  Waveform zero;
  zero.sample_rate = 24000;
  zero.samples.assign(96000, 0.0);
  MelSpectrogram m = ComputeMelSpectrogram(zero);
  for (double v : m.values.data) REQUIRE(v == std::log(1e-10));
}

TEST_CASE("mel: 1 kHz tone lands in the filter centred nearest 1 kHz") {
  MelConfig cfg;
  const double top = SlaneyMel(12000.0);
  std::size_t nearest = 0;
  double nearest_gap = 1e30;
  for (int i = 0; i < cfg.n_mels; ++i) {
    const double centre = SlaneyHz(top * (i + 1) / (cfg.n_mels + 1));
    if (std::abs(centre - 1000.0) < nearest_gap) {
      nearest_gap = std::abs(centre - 1000.0);
      nearest = static_cast<std::size_t>(i);
    }
  }
  const auto centres = MelCenterFrequencies(cfg);
  CHECK(centres[nearest] == doctest::Approx(1000.0).epsilon(0.05));

  MelSpectrogram m = ComputeMelSpectrogram(Tone(1000.0, 4.0, 24000), cfg);
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t r = 0; r < m.n_mels(); ++r) {
    double e = 0.0;
    for (std::size_t t = 0; t < m.frames(); ++t) e += std::exp(m.values(r, t));
    if (e > best_energy) {
      best_energy = e;
      best = r;
    }
  }
  CHECK(best == nearest);
}

TEST_CASE("mel: frame count is floor(len / hop) + 1 for short inputs") {
  for (std::size_t len = 1; len <= 6000; len += (len < 1300 ? 1 : 37)) {
    Waveform w;
    w.sample_rate = 24000;
    w.samples.assign(len, 0.01);
    const MelSpectrogram m = ComputeMelSpectrogram(w);
    REQUIRE_MESSAGE(m.frames() == len / 600 + 1, "len " << len);
    REQUIRE(MelFrameCount(len, 600) == len / 600 + 1);
  }
}

TEST_CASE("mel: filterbank rows are area-normalized triangles") {
  MelConfig cfg;
  Matrix fb = MelFilterbank(cfg);
  CHECK(fb.rows == 128);
  CHECK(fb.cols == 601);
  const auto centres = MelCenterFrequencies(cfg);
  for (std::size_t r = 0; r < fb.rows; ++r) {
    double area = 0.0;
    for (std::size_t c = 0; c < fb.cols; ++c) {
      REQUIRE(fb(r, c) >= 0.0);
      area += fb(r, c) * 24000.0 / 1201.0;
    }
    // Narrow low filters straddle few bins, so only the wide ones are
    // compared against unit area.
    if (centres[r] > 2000.0) CHECK(area == doctest::Approx(1.0).epsilon(0.02));
    if (r > 0) CHECK(centres[r] > centres[r - 1]);
  }
}

TEST_CASE("pitch: 220 Hz harmonic tone") {
  PitchContour c = EstimatePitch(HarmonicTone(220.0, 4.0, 24000));
  CHECK(c.frames() == 801);
  CHECK(c.hop_seconds == 0.005);
  std::vector<double> voiced;
  for (std::size_t i = 0; i < c.frames(); ++i) {
    CHECK((c.f0[i] == 0.0) == !c.voiced[i]);
    if (c.voiced[i]) {
      CHECK(c.f0[i] >= 70.0);
      CHECK(c.f0[i] <= 400.0);
      voiced.push_back(c.f0[i]);
    }
  }
  REQUIRE(!voiced.empty());
  std::nth_element(voiced.begin(), voiced.begin() + voiced.size() / 2,
                   voiced.end());
  const double median = voiced[voiced.size() / 2];
  CHECK(median >= 213.4);
  CHECK(median <= 226.6);
}

TEST_CASE("pitch: accuracy on harmonic tones across the range") {
  for (double f0 : {80.0, 123.0, 175.0, 260.0, 350.0}) {
    for (int harmonics : {3, 6}) {
      PitchContour c = EstimatePitch(HarmonicTone(f0, 2.0, 24000, harmonics));
      std::size_t good = 0;
      for (std::size_t i = 0; i < c.frames(); ++i) {
        if (c.voiced[i] && std::abs(c.f0[i] - f0) <= 0.03 * f0) ++good;
      }
      CHECK_MESSAGE(good >= 0.95 * c.frames(), "f0 " << f0 << " harmonics "
                                                     << harmonics);
    }
  }
}

TEST_CASE("pitch: white noise is mostly unvoiced, silence fully") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    PitchContour c = EstimatePitch(WhiteNoise(4.0, 24000, seed));
    const auto n = std::count(c.voiced.begin(), c.voiced.end(), true);
    CHECK(n <= 0.2 * c.frames());
  }
  Waveform zero;
  zero.sample_rate = 24000;
  zero.samples.assign(96000, 0.0);
  PitchContour c = EstimatePitch(zero);
  CHECK(c.frames() == 801);
  CHECK(std::count(c.voiced.begin(), c.voiced.end(), true) == 0);
  for (double f : c.f0) CHECK(f == 0.0);
}

TEST_CASE("continue_contour: examples") {
  PitchContour full = Contour({100.0, 110.0, 120.0});
  PitchContour same = ContinueContour(full);
  CHECK(same.f0 == full.f0);
  CHECK(same.voiced == full.voiced);

  PitchContour gap = ContinueContour(Contour({100.0, 0.0, 0.0, 0.0, 200.0}));
  CHECK(gap.f0[1] == doctest::Approx(100.0 * std::pow(2.0, 0.25)));
  CHECK(gap.f0[2] == doctest::Approx(100.0 * std::pow(2.0, 0.5)));
  CHECK(gap.f0[3] == doctest::Approx(100.0 * std::pow(2.0, 0.75)));
  for (bool v : gap.voiced) CHECK(v);

  PitchContour hold = ContinueContour(Contour({0.0, 0.0, 150.0, 0.0}));
  for (double f : hold.f0) CHECK(f == 150.0);

  CHECK_THROWS_AS(ContinueContour(Contour({0.0, 0.0})), Error);
}

TEST_CASE("continue_contour: idempotent on random contours") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> hz(70.0, 400.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> f0(1 + rng() % 60);
    for (double& v : f0) v = (rng() % 3 == 0) ? 0.0 : hz(rng);
    if (std::all_of(f0.begin(), f0.end(), [](double v) { return v == 0.0; })) {
      f0[rng() % f0.size()] = hz(rng);
    }
    PitchContour once = ContinueContour(Contour(f0));
    PitchContour twice = ContinueContour(once);
    REQUIRE(once.f0 == twice.f0);
    for (double v : once.f0) {
      REQUIRE(v >= 70.0 - 1e-9);
      REQUIRE(v <= 400.0 + 1e-9);
    }
  }
}

TEST_CASE("cwt_pitch: shape and constant input") {
  CwtConfig cfg;
  REQUIRE(cfg.scales.size() == 36);
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    CHECK(cfg.scales[i] == static_cast<double>(i + 1));
  }
  PitchSpectrogram s = CwtPitch(Contour(std::vector<double>(801, 180.0)));
  CHECK(s.coeffs.rows == 36);
  CHECK(s.coeffs.cols == 801);
  CHECK(s.scale_values == cfg.scales);
  for (double v : s.coeffs.data) REQUIRE(v == 0.0);

  Matrix raw = MexicanHatCwt(std::vector<double>(300, 2.5), cfg.scales);
  for (double v : raw.data) REQUIRE(std::abs(v) < 1e-12);
}

TEST_CASE("cwt_pitch: impulse peaks at its own frame at every scale") {
  std::vector<double> f0(801, 120.0);
  const std::size_t t0 = 400;
  f0[t0] = 240.0;
  PitchSpectrogram s = CwtPitch(Contour(f0));
  for (std::size_t r = 0; r < s.coeffs.rows; ++r) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t t = 0; t < s.coeffs.cols; ++t) {
      if (std::abs(s.coeffs(r, t)) > best_mag) {
        best_mag = std::abs(s.coeffs(r, t));
        best = t;
      }
    }
    CHECK_MESSAGE(best == t0, "scale " << s.scale_values[r]);
  }
}

TEST_CASE("cwt_pitch: rows follow scales, frames follow the contour") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> hz(80.0, 300.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f0(10 + rng() % 500);
    for (double& v : f0) v = hz(rng);
    CwtConfig cfg;
    cfg.scales.clear();
    for (double s = 1.0; s <= 37.0; s += 1.0 + static_cast<double>(rng() % 4)) {
      cfg.scales.push_back(s);
    }
    PitchSpectrogram p = CwtPitch(Contour(f0), cfg);
    CHECK(p.coeffs.rows == cfg.scales.size());
    CHECK(p.coeffs.cols == f0.size());
  }
  CwtConfig bad;
  bad.scales = {1.0, 3.0, 2.0};
  CHECK_THROWS_AS(CwtPitch(Contour({100.0, 120.0}), bad), Error);
  bad.scales = {0.5, 3.0};
  CHECK_THROWS_AS(CwtPitch(Contour({100.0, 120.0}), bad), Error);
  bad.scales = {2.0, 40.0};
  CHECK_THROWS_AS(CwtPitch(Contour({100.0, 120.0}), bad), Error);
}
