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

#ifndef VEMB_NN_GRAD_CHECK_H_
#define VEMB_NN_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "vemb/nn/tensor.h"

namespace vemb::nn {

using GradCheckFn =
    std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

struct GradCheckOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise an evenly strided subset of at most
  // this many coordinates per input.
  std::size_t max_coordinates_per_input = 0;
  std::uint64_t seed = 0x5eed;
};

// Compares reverse-mode gradients against central differences for every
// input. Non-scalar outputs are contracted with fixed random weights first.
// Returns max over coordinates of |a - n| / max(1, |a|, |n|).
double GradCheck(const GradCheckFn& fn, std::vector<Tensor<double>> inputs,
                 const GradCheckOptions& options = {});

// Same comparison for tensors the closure already captures, such as model
// parameters. Values are perturbed in place and restored.
double GradCheckInPlace(const std::function<Tensor<double>()>& fn,
                        std::vector<Tensor<double>> tensors,
                        const GradCheckOptions& options = {});

}  // namespace vemb::nn

#endif  // VEMB_NN_GRAD_CHECK_H_
