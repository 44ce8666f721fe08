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

#include "vemb/nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "vemb/error.h"
#include "vemb/nn/ops.h"

namespace vemb::nn {

namespace {

double Compare(const GradCheckFn& fn, std::vector<Tensor<double>>& inputs,
               const GradCheckOptions& options) {
  for (auto& in : inputs) in.ZeroGrad();
  Tensor<double> projection;
  auto scalar_loss = [&](const std::vector<Tensor<double>>& args) {
    Tensor<double> out = fn(args);
    if (out.numel() == 1) return Reshape(out, {});
    if (!projection.defined()) {
      std::mt19937_64 rng(options.seed);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      std::vector<double> w(out.numel());
      for (auto& v : w) v = dist(rng);
      projection = Tensor<double>::FromData(out.shape(), std::move(w));
    }
    return Sum(Mul(out, projection));
  };

  Tensor<double> loss = scalar_loss(inputs);
  loss.Backward();
  std::vector<std::vector<double>> analytic;
  for (auto& in : inputs) {
    analytic.emplace_back(in.has_grad() ? in.ToVector().size() : 0, 0.0);
    if (in.has_grad()) {
      auto g = in.grad();
      analytic.back().assign(g.begin(), g.end());
    } else {
      analytic.back().assign(in.numel(), 0.0);
    }
  }

  NoGradGuard no_grad;
  double worst = 0.0;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    auto values = inputs[a].data();
    const std::size_t n = values.size();
    std::size_t stride = 1;
    if (options.max_coordinates_per_input > 0 &&
        n > options.max_coordinates_per_input) {
      stride = (n + options.max_coordinates_per_input - 1) /
               options.max_coordinates_per_input;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + options.eps;
      const double plus = scalar_loss(inputs).item();
      values[i] = saved - options.eps;
      const double minus = scalar_loss(inputs).item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double exact = analytic[a][i];
      const double denom =
          std::max({1.0, std::abs(exact), std::abs(numeric)});
      worst = std::max(worst, std::abs(exact - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace

double GradCheck(const GradCheckFn& fn, std::vector<Tensor<double>> inputs,
                 const GradCheckOptions& options) {
  for (auto& in : inputs) {
    in = Tensor<double>::FromData(in.shape(), in.ToVector(), true);
  }
  return Compare(fn, inputs, options);
}

double GradCheckInPlace(const std::function<Tensor<double>()>& fn,
                        std::vector<Tensor<double>> tensors,
                        const GradCheckOptions& options) {
  for (auto& t : tensors) {
    Check(t.defined() && t.requires_grad(), ErrorCode::kInvalidArgument,
          "GradCheckInPlace needs tensors that require grad");
  }
  return Compare([&](const std::vector<Tensor<double>>&) { return fn(); },
                 tensors, options);
}

}  // namespace vemb::nn
