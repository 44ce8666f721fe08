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

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "test_util.h"
#include "vemb/error.h"
#include "vemb/metrics.h"

using namespace vemb;
using vemb::testing::BruteForceTprAtFpr;

namespace {

ScoreSet RandomScores(std::mt19937_64& rng, std::size_t n, bool quantize) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScoreSet s;
  const std::size_t np = 1 + rng() % (n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double v = i < np ? std::min(1.0, u(rng) + 0.3) : u(rng);
    // Coarse grid so ties are common and exact.
    if (quantize) v = std::round(v * 20.0) / 20.0;
    (i < np ? s.positive : s.negative).push_back(v);
  }
  return s;
}

}  // namespace

TEST_CASE("cosine similarity examples") {
  const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  CHECK(CosineSimilarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> x = {1, 0, 0}, y = {0, 1, 0};
  CHECK(CosineSimilarity(x, y) == 0.0);
  CHECK(CosineSimilarity(a, b) == doctest::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0))));
  CHECK(CosineSimilarity(a, b) == doctest::Approx(0.97463).epsilon(1e-5));
  const std::vector<double> z = {0, 0, 0};
  CHECK_THROWS_AS(CosineSimilarity(a, z), Error);
  const std::vector<double> short_vec = {1, 0};
  CHECK_THROWS_AS(CosineSimilarity(a, short_vec), Error);
}

TEST_CASE("tpr_at_fpr: separation examples") {
  ScoreSet good{{0.9, 0.9, 0.9}, {0.1, 0.1, 0.1, 0.1}};
  for (double n : kReferenceFprLevels) CHECK(TprAtFpr(good, n) == 1.0);
  ScoreSet bad{{0.1, 0.1}, {0.9, 0.9, 0.9}};
  CHECK(TprAtFpr(bad, 0.5) == 0.0);
  CHECK_THROWS_AS(TprAtFpr(ScoreSet{{}, {0.1}}, 0.5), Error);
  CHECK_THROWS_AS(TprAtFpr(ScoreSet{{0.1}, {}}, 0.5), Error);
  CHECK_THROWS_AS(TprAtFpr(good, 0.0), Error);
}

TEST_CASE("tpr_at_fpr: k-th negative threshold") {
  // Ten negatives 0.0..0.9; N = 0.2 gives k = 2 and threshold 0.8.
  ScoreSet s;
  for (int i = 0; i < 10; ++i) s.negative.push_back(i / 10.0);
  s.positive = {0.95, 0.85, 0.8, 0.5};
  CHECK(TprAtFpr(s, 0.2) == 0.5);
  // k = 0 compares against the largest negative.
  CHECK(TprAtFpr(s, 0.05) == 0.25);
}

TEST_CASE("tpr_at_fpr matches the exhaustive sweep") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng() % (trial < 190 ? 300 : 10000);
    ScoreSet s = RandomScores(rng, n, trial % 2 == 0);
    for (double level : kReferenceFprLevels) {
      REQUIRE(TprAtFpr(s, level) == BruteForceTprAtFpr(s.positive, s.negative, level));
    }
  }
}

TEST_CASE("tpr_at_fpr is non-decreasing in N") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    ScoreSet s = RandomScores(rng, 50 + rng() % 200, trial % 3 == 0);
    double prev = -1.0;
    for (double n = 0.01; n <= 1.0; n += 0.01) {
      const double t = TprAtFpr(s, n);
      REQUIRE(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("eer examples") {
  CHECK(Eer(ScoreSet{{0.9, 0.8}, {0.1, 0.2}}) == 0.0);
  CHECK(Eer(ScoreSet{{0.8, 0.6}, {0.7, 0.3}}) == 0.25);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  ScoreSet same;
  for (int i = 0; i < 100000; ++i) {
    same.positive.push_back(n(rng));
    same.negative.push_back(n(rng));
  }
  CHECK(std::abs(Eer(same) - 0.5) <= 0.01);
}

TEST_CASE("eer is invariant under increasing transforms") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    ScoreSet s = RandomScores(rng, 20 + rng() % 300, trial % 2 == 0);
    ScoreSet t = s;
    for (double& v : t.positive) v = std::exp(3.0 * v) - 7.0;
    for (double& v : t.negative) v = std::exp(3.0 * v) - 7.0;
    CHECK(Eer(t) == doctest::Approx(Eer(s)).epsilon(1e-12));
    CHECK(Eer(s) >= 0.0);
    CHECK(Eer(s) <= 1.0);
  }
}

TEST_CASE("duration metrics: hand cases") {
  const std::vector<double> x = {3, 7, 1}, same = x;
  CHECK(Wder(x, same) == 1.0);
  CHECK(Mae(x, same) == 0.0);
  CHECK(Rmse(x, same) == 0.0);
  const std::vector<double> a = {5}, b = {8};
  CHECK(Wder(a, b) == 1.0 / 3.0);
  const std::vector<double> c = {10, 10}, d = {11, 14};
  CHECK(Wder(c, d) == 0.625);
  const std::vector<double> z = {0, 0}, e = {3, 4};
  CHECK(Mae(z, e) == 3.5);
  CHECK(std::abs(Rmse(z, e) - std::sqrt(12.5)) <= 1e-12);
  CHECK(Rmse(z, e) == doctest::Approx(3.5355).epsilon(1e-4));
  CHECK_THROWS_AS(Wder(a, c), Error);
  CHECK_THROWS_AS(Mae(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("duration metrics: random case against the definitions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::round(u(rng));
    y[i] = x[i] + (u(rng) - 15.0) / 5.0;
  }
  double mae = 0, mse = 0, wder = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::abs(x[i] - y[i]);
    mae += e;
    mse += e * e;
    wder += e <= 1.0 ? 1.0 : 1.0 / e;
  }
  CHECK(std::abs(Mae(x, y) - mae / 200) <= 1e-12);
  CHECK(std::abs(Rmse(x, y) - std::sqrt(mse / 200)) <= 1e-12);
  CHECK(std::abs(Wder(x, y) - wder / 200) <= 1e-12);
  const double w = Wder(x, y);
  CHECK(w > 0.0);
  CHECK(w <= 1.0);
}

TEST_CASE("wder is 1 exactly when every error is within one frame") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(1 + rng() % 20), y;
    for (double& v : x) v = static_cast<double>(rng() % 40);
    for (double v : x) y.push_back(v + u(rng));
    CHECK(Wder(x, y) == 1.0);
    y[rng() % y.size()] += 3.0;
    CHECK(Wder(x, y) < 1.0);
  }
}

TEST_CASE("ccc examples and properties") {
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(Ccc(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> anti = {4, 3, 2, 1};  // -x + 2 * mean(x)
  CHECK(Ccc(x, anti) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> y = {1.1, 2.1, 2.9, 4.2};
  const double mx = 2.5, my = (1.1 + 2.1 + 2.9 + 4.2) / 4.0;
  double vx = 0, vy = 0, cov = 0;
  for (int i = 0; i < 4; ++i) {
    vx += (x[i] - mx) * (x[i] - mx) / 4.0;
    vy += (y[i] - my) * (y[i] - my) / 4.0;
    cov += (x[i] - mx) * (y[i] - my) / 4.0;
  }
  CHECK(std::abs(Ccc(x, y) - 2.0 * cov / (vx + vy + (mx - my) * (mx - my))) <= 1e-12);

  // Matching means and variances reduce CCC to Pearson correlation.
  const std::vector<double> p = {1, 2, 3, 4}, q = {2, 1, 4, 3};
  CHECK(Ccc(p, q) == doctest::Approx(0.6).epsilon(1e-12));

  const std::vector<double> k = {2, 2, 2};
  CHECK_THROWS_AS(Ccc(k, k), Error);
  const std::vector<double> one = {1};
  CHECK_THROWS_AS(Ccc(one, one), Error);
}

TEST_CASE("score_trials and trial files") {
  EmbeddingStore store;
  store["a"] = {1, 0, 0};
  store["a2"] = {2, 0, 0};
  store["b"] = {0, 1, 0};
  store["c"] = {1, 1, 0};
  TrialList trials = {{"a", "a2", true}};
  ScoreSet s = ScoreTrials(store, trials);
  CHECK(s.positive == std::vector<double>{1.0});
  CHECK(s.negative.empty());
  CHECK_THROWS_AS(ScoreTrials(store, {}), Error);
  CHECK_THROWS_AS(ScoreTrials(store, {{"a", "zzz", false}}), Error);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  EmbeddingStore big;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> v(5);
    for (double& x : v) x = n(rng);
    big["u" + std::to_string(i)] = v;
  }
  TrialList ten;
  for (int i = 0; i < 10; ++i) {
    ten.push_back({"u" + std::to_string(rng() % 6), "u" + std::to_string(rng() % 6), i % 2 == 0});
  }
  ScoreSet bs = ScoreTrials(big, ten);
  std::size_t ip = 0, in = 0;
  for (const auto& t : ten) {
    const auto& u = big[t.id_a];
    const auto& v = big[t.id_b];
    double dot = 0, nu = 0, nv = 0;
    for (int d = 0; d < 5; ++d) {
      dot += u[d] * v[d];
      nu += u[d] * u[d];
      nv += v[d] * v[d];
    }
    const double c = dot / std::sqrt(nu * nv);
    CHECK(std::abs((t.is_target ? bs.positive[ip++] : bs.negative[in++]) - c) <= 1e-12);
  }

  const auto dir = vemb::testing::TempDir("trials");
  const std::string path = (dir / "trials.tsv").string();
  WriteTrialList(path, ten);
  const TrialList back = ReadTrialList(path);
  REQUIRE(back.size() == ten.size());
  for (std::size_t i = 0; i < ten.size(); ++i) {
    CHECK(back[i].id_a == ten[i].id_a);
    CHECK(back[i].id_b == ten[i].id_b);
    CHECK(back[i].is_target == ten[i].is_target);
  }
  std::ofstream(dir / "bad.tsv") << "a\tb\t2\n";
  CHECK_THROWS_AS(ReadTrialList((dir / "bad.tsv").string()), Error);
  CHECK_THROWS_AS(ReadTrialList((dir / "none.tsv").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("metrics report lists the reference levels") {
  ScoreSet s{{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3, 0.4}};
  auto j = nlohmann::json::parse(MetricsReport(s, kReferenceFprLevels, R"({"config_hash":"x"})"));
  for (const char* k : {"0.5", "0.2", "0.1", "0.05", "0.01"}) {
    CHECK(j["tpr_at_fpr"][k] == 1.0);
  }
  CHECK(j["eer"] == 0.0);
  CHECK(j["config_hash"] == "x");
}
