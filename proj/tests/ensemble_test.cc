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

#include <fstream>
#include <random>

#include <json.hpp>

#include "test_util.h"
#include "vemb/ensemble.h"
#include "vemb/error.h"

using namespace vemb;

TEST_CASE("fuse_scores: preset examples") {
  const std::vector<double> a = {0.99}, b = {0.5};
  CHECK(FuseScores(a, b, FusionPreset("y1"))[0] == 0.25);
  const std::vector<double> c = {1.0}, d = {0.0};
  CHECK(std::abs(FuseScores(c, d, FusionPreset("Y3"))[0] - 0.25) <= 1e-12);
  CHECK_THROWS_AS(FuseScores(a, std::vector<double>{}, FusionPreset("y2")), Error);
  CHECK_THROWS_AS(FusionPreset("y4"), Error);
}

TEST_CASE("presets are exactly the three published weightings") {
  const auto& p = FusionPresets();
  REQUIRE(p.size() == 3);
  const double w[3][2] = {{0.5, 0.5}, {0.35, 0.65}, {0.25, 0.75}};
  for (int i = 0; i < 3; ++i) {
    CHECK(p[i].w1 == w[i][0]);
    CHECK(p[i].w2 == w[i][1]);
    CHECK(p[i].shift == 0.99);
    CHECK(p[i].scale == 100.0);
    CHECK(p[i].w1 + p[i].w2 == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(p[0].published_eer == 23.625);
  CHECK(p[1].published_eer == 20.762);
  CHECK(p[2].published_eer == 20.669);
}

TEST_CASE("fuse_scores: random inputs against the formula") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x1(100), x2(100);
  for (auto& v : x1) v = u(rng);
  for (auto& v : x2) v = 10.0 * u(rng);
  for (const auto& cfg : FusionPresets()) {
    const auto y = FuseScores(x1, x2, cfg);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(std::abs(y[i] - (cfg.w1 * (x1[i] - 0.99) * 100.0 + cfg.w2 * x2[i])) <= 1e-12);
    }
    // Affine in x1: fuse(a x1 + b) = fuse(x1) + w1 * scale * ((a - 1) x1 + b).
    const double a = 1.7, b = -0.2;
    std::vector<double> z(100);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x1[i] + b;
    const auto yz = FuseScores(z, x2, cfg);
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(std::abs(yz[i] - (y[i] + cfg.w1 * 100.0 * ((a - 1.0) * x1[i] + b))) <= 1e-10);
    }
  }
}

TEST_CASE("evaluate_fusion: a separating second system helps") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> noise(0.98, 1.0);
  TrialList trials;
  std::vector<double> x1, x2;
  for (int i = 0; i < 400; ++i) {
    const bool target = i % 3 == 0;
    trials.push_back({"a" + std::to_string(i), "b", target});
    x1.push_back(noise(rng));
    x2.push_back(target ? 0.6 + 0.3 * noise(rng) : -0.6 - 0.3 * noise(rng));
  }
  ScoreSet s1;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    (trials[i].is_target ? s1.positive : s1.negative).push_back(x1[i]);
  }
  const auto results = EvaluateFusion(trials, x1, x2, FusionPresets());
  REQUIRE(results.size() == 3);
  CHECK(results[2].config.name == "y3");
  CHECK(results[2].eer <= Eer(s1));

  // Same ordering in both systems leaves EER unchanged.
  std::vector<double> same(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) same[i] = (x1[i] - 0.99) * 100.0;
  for (const auto& r : EvaluateFusion(trials, x1, same, FusionPresets())) {
    CHECK(r.eer == doctest::Approx(Eer(s1)).epsilon(1e-12));
  }
  auto j = nlohmann::json::parse(FusionReport(results, Eer(s1), 0.0));
  CHECK(j["fusion"].size() == 3);
  CHECK(j["fusion"][2]["published_eer_percent"] == 20.669);
}

TEST_CASE("score files round trip and reject bad lines") {
  const auto dir = vemb::testing::TempDir("scores");
  const std::vector<double> scores = {0.1, -3.25, 1e-17, 0.9999999999999999};
  WriteScoreFile((dir / "s.tsv").string(), scores);
  CHECK(ReadScoreFile((dir / "s.tsv").string()) == scores);
  std::ofstream(dir / "shuffled.tsv") << "1\t0.5\n0\t0.25\n";
  CHECK(ReadScoreFile((dir / "shuffled.tsv").string()) == std::vector<double>{0.25, 0.5});
  std::ofstream(dir / "gap.tsv") << "0\t0.5\n2\t0.25\n";
  CHECK_THROWS_AS(ReadScoreFile((dir / "gap.tsv").string()), Error);
  std::ofstream(dir / "junk.tsv") << "0 0.5 extra\n";
  CHECK_THROWS_AS(ReadScoreFile((dir / "junk.tsv").string()), Error);
  std::filesystem::remove_all(dir);
}
