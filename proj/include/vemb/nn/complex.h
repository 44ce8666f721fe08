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

#ifndef VEMB_NN_COMPLEX_H_
#define VEMB_NN_COMPLEX_H_

#include <cstdint>
#include <random>

#include "vemb/nn/tensor.h"

namespace vemb::nn {

template <typename T>
struct ComplexTensor {
  Tensor<T> real;
  Tensor<T> imag;

  const Shape& shape() const { return real.shape(); }
};

// (a + bi) * (c + di) with * the real cross-correlation:
// real = a*c - b*d, imag = a*d + b*c.
template <typename T>
ComplexTensor<T> ComplexConv2d(const ComplexTensor<T>& x,
                               const Tensor<T>& weight_real,
                               const Tensor<T>& weight_imag,
                               std::size_t stride, std::size_t padding);

// ELU on the real and imaginary parts separately.
template <typename T>
ComplexTensor<T> ComplexElu(const ComplexTensor<T>& x);

// Zeroes whole complex elements with probability p and rescales survivors by
// 1 / (1 - p). Identity when `training` is false or p == 0.
template <typename T>
ComplexTensor<T> ComplexDropout(const ComplexTensor<T>& x, double p,
                                bool training, std::mt19937_64& rng);

// Keep-mask with P(keep) = 1 - p, already scaled by 1 / (1 - p).
template <typename T>
Tensor<T> DropoutMask(const Shape& shape, double p, std::mt19937_64& rng);

}  // namespace vemb::nn

#endif  // VEMB_NN_COMPLEX_H_
