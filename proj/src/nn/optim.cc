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

#include "vemb/nn/optim.h"

#include <cmath>

#include "vemb/error.h"

namespace vemb::nn {

template <typename T>
void AdamUpdate(std::span<T> param, std::span<const T> grad,
                std::span<double> first_moment, std::span<double> second_moment,
                std::int64_t step, const AdamConfig& cfg) {
  Check(param.size() == grad.size() && param.size() == first_moment.size() &&
            param.size() == second_moment.size(),
        ErrorCode::kShapeMismatch, "Adam state size mismatch");
  Check(step >= 1, ErrorCode::kInvalidArgument, "Adam step is 1-based");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad[i]);
    first_moment[i] = cfg.beta1 * first_moment[i] + (1.0 - cfg.beta1) * g;
    second_moment[i] = cfg.beta2 * second_moment[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = first_moment[i] / c1;
    const double v_hat = second_moment[i] / c2;
    param[i] = static_cast<T>(static_cast<double>(param[i]) -
                              cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

template <typename T>
Adam<T>::Adam(ParameterSet<T>& params, AdamConfig cfg)
    : params_(&params), cfg_(cfg) {
  for (const auto& [name, t] : params.entries()) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

template <typename T>
void Adam<T>::Step() {
  ++step_;
  auto& entries = params_->entries();
  Check(entries.size() == m_.size(), ErrorCode::kInvalidArgument,
        "parameter set changed after optimizer construction");
  std::vector<T> zeros;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor<T> t = entries[i].second;
    std::span<const T> g;
    if (t.has_grad()) {
      g = t.grad();
    } else {
      zeros.assign(t.numel(), T(0));
      g = zeros;
    }
    AdamUpdate<T>(t.data(), g, m_[i], v_[i], step_, cfg_);
  }
}

template void AdamUpdate<float>(std::span<float>, std::span<const float>,
                                std::span<double>, std::span<double>,
                                std::int64_t, const AdamConfig&);
template void AdamUpdate<double>(std::span<double>, std::span<const double>,
                                 std::span<double>, std::span<double>,
                                 std::int64_t, const AdamConfig&);
template class Adam<float>;
template class Adam<double>;

}  // namespace vemb::nn
