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

#ifndef VEMB_NN_OPTIM_H_
#define VEMB_NN_OPTIM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "vemb/nn/layers.h"

namespace vemb::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update of `param` in place. `step` is 1-based.
template <typename T>
void AdamUpdate(std::span<T> param, std::span<const T> grad,
                std::span<double> first_moment, std::span<double> second_moment,
                std::int64_t step, const AdamConfig& cfg);

template <typename T>
class Adam {
 public:
  Adam(ParameterSet<T>& params, AdamConfig cfg);

  // Applies the accumulated grads; parameters without a grad count as zero
  // gradient.
  void Step();
  std::int64_t steps() const { return step_; }

 private:
  ParameterSet<T>* params_;
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace vemb::nn

#endif  // VEMB_NN_OPTIM_H_
