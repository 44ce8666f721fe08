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
#include <random>

#include "vemb/error.h"
#include "vemb/losses.h"
#include "vemb/nn/grad_check.h"
#include "vemb/nn/ops.h"

using namespace vemb;
using T64 = nn::Tensor<double>;

namespace {

T64 Random(const nn::Shape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::vector<double> v(nn::NumElements(shape));
  for (double& x : v) x = n(rng);
  return T64::FromData(shape, v);
}

// cos[i][j] between row i of f [n, d] and column j of w [d, c].
std::vector<std::vector<double>> Cosines(const T64& f, const T64& w) {
  const std::size_t n = f.dim(0), d = f.dim(1), c = w.dim(1);
  std::vector<std::vector<double>> out(n, std::vector<double>(c));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double dot = 0, nf = 0, nw = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const double a = f.data()[i * d + k], b = w.data()[k * c + j];
        dot += a * b;
        nf += a * a;
        nw += b * b;
      }
      out[i][j] = dot / std::sqrt(nf * nw);
    }
  return out;
}

// -1/n sum log(e^{s t_y} / (e^{s t_y} + sum_{j != y} e^{s cos_j})) with the
// target term t_y supplied by `target`.
template <typename F>
double MarginOracle(const T64& f, const T64& w, const std::vector<int>& y,
                    double s, F target) {
  auto cos = Cosines(f, w);
  double loss = 0.0;
  for (std::size_t i = 0; i < cos.size(); ++i) {
    const double num = std::exp(s * target(cos[i][y[i]]));
    double den = num;
    for (std::size_t j = 0; j < cos[i].size(); ++j) {
      if (static_cast<int>(j) != y[i]) den += std::exp(s * cos[i][j]);
    }
    loss -= std::log(num / den);
  }
  return loss / static_cast<double>(cos.size());
}

}  // namespace

TEST_CASE("am_softmax: single class gives exactly zero") {
  std::mt19937_64 rng(1);
  const std::vector<int> y = {0, 0, 0};
  CHECK(AmSoftmaxLoss(Random({3, 6}, rng), Random({6, 1}, rng), y, 30.0, 0.4).item() == 0.0);
}

TEST_CASE("am_softmax: s = 1, m = 0 is plain cosine cross-entropy") {
  std::mt19937_64 rng(2);
  T64 f = Random({5, 7}, rng), w = Random({7, 4}, rng);
  const std::vector<int> y = {0, 3, 1, 1, 2};
  const double oracle = MarginOracle(f, w, y, 1.0, [](double c) { return c; });
  CHECK(std::abs(AmSoftmaxLoss(f, w, y, 1.0, 0.0).item() - oracle) <= 1e-12);
}

TEST_CASE("am_softmax: hand-fixed unit vectors") {
  const double r = 1.0 / std::sqrt(2.0);
  T64 f = T64::FromData({2, 2}, {1.0, 0.0, r, r});
  T64 w = T64::FromData({2, 3}, {1.0, 0.0, -1.0, 0.0, 1.0, 0.0});
  const std::vector<int> y = {0, 1};
  // Row 0: cos = (1, 0, -1), target 0. Row 1: cos = (r, r, -r), target 1.
  const double l0 = -std::log(std::exp(30 * 0.6) /
                              (std::exp(30 * 0.6) + 1.0 + std::exp(-30.0)));
  const double l1 = -std::log(std::exp(30 * (r - 0.4)) /
                              (std::exp(30 * (r - 0.4)) + std::exp(30 * r) + std::exp(-30 * r)));
  CHECK(std::abs(AmSoftmaxLoss(f, w, y, 30.0, 0.4).item() - 0.5 * (l0 + l1)) <= 1e-12);
  const double oracle =
      MarginOracle(f, w, y, 30.0, [](double c) { return c - 0.4; });
  CHECK(std::abs(AmSoftmaxLoss(f, w, y, 30.0, 0.4).item() - oracle) <= 1e-12);
}

TEST_CASE("arcface: m = 0 matches am_softmax, theta = 0 and a hand case") {
  std::mt19937_64 rng(3);
  T64 f = Random({4, 6}, rng), w = Random({6, 5}, rng);
  const std::vector<int> y = {4, 0, 2, 2};
  CHECK(std::abs(ArcFaceLoss(f, w, y, 30.0, 0.0).item() -
                 AmSoftmaxLoss(f, w, y, 30.0, 0.0).item()) <= 1e-12);

  // f equals the target column, so theta_y = 0; the other column is
  // orthogonal. Only the clamp at 1 - 1e-7 separates the result from cos(m).
  T64 f0 = T64::FromData({1, 2}, {1.0, 0.0});
  T64 w0 = T64::FromData({2, 2}, {1.0, 0.0, 0.0, 1.0});
  const std::vector<int> y0 = {0};
  const double loss = ArcFaceLoss(f0, w0, y0, 30.0, 0.5).item();
  // loss = -log(e^{s t} / (e^{s t} + 1)) = log(1 + e^{-s t}).
  const double t = -std::log(std::expm1(loss)) / 30.0;
  CHECK(t == doctest::Approx(std::cos(0.5)).epsilon(1e-3));
  CHECK(std::cos(0.5) == doctest::Approx(0.8776).epsilon(1e-4));

  T64 fh = T64::FromData({2, 3}, {0.3, -1.2, 0.5, 2.0, 0.1, -0.7});
  T64 wh = T64::FromData({3, 3}, {1.0, 0.2, -0.5, 0.0, 1.0, 0.3, 0.4, -0.6, 1.0});
  const std::vector<int> yh = {1, 2};
  const double oracle = MarginOracle(fh, wh, yh, 30.0, [](double c) {
    return std::cos(std::acos(std::clamp(c, -1 + 1e-7, 1 - 1e-7)) + 0.5);
  });
  CHECK(std::abs(ArcFaceLoss(fh, wh, yh, 30.0, 0.5).item() - oracle) <= 1e-10);
}

TEST_CASE("losses ignore embedding scale and grow with the margin") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    T64 f = Random({4, 8}, rng), w = Random({8, 5}, rng);
    const std::vector<int> y = {static_cast<int>(rng() % 5), static_cast<int>(rng() % 5),
                                static_cast<int>(rng() % 5), static_cast<int>(rng() % 5)};
    T64 f2 = nn::Scale(f, 2.0);
    CHECK(std::abs(AmSoftmaxLoss(f2, w, y, 30.0, 0.4).item() -
                   AmSoftmaxLoss(f, w, y, 30.0, 0.4).item()) <= 1e-9);
    CHECK(std::abs(ArcFaceLoss(f2, w, y, 30.0, 0.5).item() -
                   ArcFaceLoss(f, w, y, 30.0, 0.5).item()) <= 1e-9);
    double prev = -1.0;
    for (double m = 0.0; m < 0.95; m += 0.1) {
      const double l = AmSoftmaxLoss(f, w, y, 30.0, m).item();
      CHECK(l >= prev);
      prev = l;
    }
  }
}

TEST_CASE("loss gradients on random 4 x 5 instances") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<int> y = {0, 4, 2, static_cast<int>(rng() % 5)};
    for (MarginKind kind : {MarginKind::kAmSoftmax, MarginKind::kArcFace}) {
      const double err = nn::GradCheck(
          [&](const std::vector<T64>& in) {
            return kind == MarginKind::kAmSoftmax
                       ? AmSoftmaxLoss(in[0], in[1], y, 30.0, 0.4)
                       : ArcFaceLoss(in[0], in[1], y, 30.0, 0.5);
          },
          {Random({4, 6}, rng), Random({6, 5}, rng)});
      CHECK_MESSAGE(err < 1e-6, MarginKindName(kind) << " " << err);
    }
  }
}

TEST_CASE("loss errors") {
  std::mt19937_64 rng(6);
  T64 f = Random({2, 3}, rng), w = Random({3, 4}, rng);
  const std::vector<int> bad = {0, 4};
  try {
    AmSoftmaxLoss(f, w, bad, 30.0, 0.4);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  T64 zero_row = T64::FromData({2, 3}, {0, 0, 0, 1, 2, 3});
  const std::vector<int> ok = {0, 1};
  try {
    ArcFaceLoss(zero_row, w, ok, 30.0, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
  }
  CHECK_THROWS_AS((MarginConfig{MarginKind::kAmSoftmax, 30.0, 1.0}.Validate()), Error);
  CHECK_THROWS_AS((MarginConfig{MarginKind::kArcFace, 0.0, 0.5}.Validate()), Error);
  CHECK(ParseMarginKind("arcface") == MarginKind::kArcFace);
  CHECK_THROWS_AS(ParseMarginKind("triplet"), Error);
}

TEST_CASE("margin head trains its weight") {
  std::mt19937_64 rng(7);
  nn::ParameterSet<double> params;
  MarginHead<double> head(params, "head", 6, 3, MarginConfig::AmSoftmax(), rng);
  CHECK(head.weight().shape() == nn::Shape{6, 3});
  T64 f = Random({3, 6}, rng);
  const std::vector<int> y = {0, 1, 2};
  head.Loss(f, y).Backward();
  double norm = 0.0;
  for (double g : params.Get("head.weight").grad()) norm += g * g;
  CHECK(norm > 0.0);
}
