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

#include "vemb/nn/complex.h"

#include "vemb/error.h"
#include "vemb/nn/ops.h"

namespace vemb::nn {

template <typename T>
ComplexTensor<T> ComplexConv2d(const ComplexTensor<T>& x,
                               const Tensor<T>& weight_real,
                               const Tensor<T>& weight_imag,
                               std::size_t stride, std::size_t padding) {
  Check(x.real.shape() == x.imag.shape(), ErrorCode::kShapeMismatch,
        "complex input parts differ in shape");
  Check(weight_real.shape() == weight_imag.shape(), ErrorCode::kShapeMismatch,
        "complex kernel parts differ in shape");
  auto ac = Conv2d(x.real, weight_real, stride, padding);
  auto bd = Conv2d(x.imag, weight_imag, stride, padding);
  auto ad = Conv2d(x.real, weight_imag, stride, padding);
  auto bc = Conv2d(x.imag, weight_real, stride, padding);
  return {Sub(ac, bd), Add(ad, bc)};
}

template <typename T>
ComplexTensor<T> ComplexElu(const ComplexTensor<T>& x) {
  return {Elu(x.real), Elu(x.imag)};
}

template <typename T>
Tensor<T> DropoutMask(const Shape& shape, double p, std::mt19937_64& rng) {
  Check(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
        "dropout probability must lie in [0, 1)");
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(NumElements(shape));
  for (auto& m : mask) {
    // 53 random bits -> uniform in [0, 1)
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m = u < p ? T(0) : keep_scale;
  }
  return Tensor<T>::FromData(shape, std::move(mask));
}

template <typename T>
ComplexTensor<T> ComplexDropout(const ComplexTensor<T>& x, double p,
                                bool training, std::mt19937_64& rng) {
  Check(p >= 0.0 && p < 1.0, ErrorCode::kInvalidArgument,
        "dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  Tensor<T> mask = DropoutMask<T>(x.shape(), p, rng);
  return {Mul(x.real, mask), Mul(x.imag, mask)};
}

#define VEMB_INSTANTIATE_COMPLEX(T)                                          \
  template ComplexTensor<T> ComplexConv2d(const ComplexTensor<T>&,           \
                                          const Tensor<T>&, const Tensor<T>&, \
                                          std::size_t, std::size_t);         \
  template ComplexTensor<T> ComplexElu(const ComplexTensor<T>&);             \
  template ComplexTensor<T> ComplexDropout(const ComplexTensor<T>&, double,  \
                                           bool, std::mt19937_64&);          \
  template Tensor<T> DropoutMask<T>(const Shape&, double, std::mt19937_64&);

VEMB_INSTANTIATE_COMPLEX(float)
VEMB_INSTANTIATE_COMPLEX(double)

#undef VEMB_INSTANTIATE_COMPLEX

}  // namespace vemb::nn
