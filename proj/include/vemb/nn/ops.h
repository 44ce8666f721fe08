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

#ifndef VEMB_NN_OPS_H_
#define VEMB_NN_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "vemb/nn/tensor.h"

// Differentiable tensor primitives. Every function records its backward rule
// when any input requires grad and grad mode is enabled.
namespace vemb::nn {

// Elementwise, identical shapes.
template <typename T> Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);

// alpha * a + beta
template <typename T> Tensor<T> Affine(const Tensor<T>& a, T alpha, T beta);
template <typename T> Tensor<T> Scale(const Tensor<T>& a, T alpha) {
  return Affine(a, alpha, T(0));
}

// x [..., d] + b [d]
template <typename T> Tensor<T> AddBias(const Tensor<T>& x, const Tensor<T>& b);
// x [C, ...] + b [C]
template <typename T>
Tensor<T> AddChannelBias(const Tensor<T>& x, const Tensor<T>& b);

// 2-D products. MatMul(a, b, true) computes a * b^T.
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b,
                 bool transpose_b = false);
template <typename T> Tensor<T> Transpose(const Tensor<T>& a);

// x [n, d_in] (or [d_in]), weight [d_out, d_in], optional bias [d_out].
template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias);

template <typename T> Tensor<T> Reshape(const Tensor<T>& a, const Shape& shape);
template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
template <typename T>
Tensor<T> Slice(const Tensor<T>& a, std::size_t axis, std::size_t start,
                std::size_t length);

// x [h, w] zero-padded to whole patches; rows are patches in row-major grid
// order, each flattened row-major: [ceil(h/p) * ceil(w/p), p * p].
template <typename T>
Tensor<T> Patchify(const Tensor<T>& x, std::size_t patch);

// Elementwise nonlinearities.
template <typename T> Tensor<T> Elu(const Tensor<T>& a, T alpha = T(1));
template <typename T> Tensor<T> Gelu(const Tensor<T>& a);
template <typename T> Tensor<T> Softplus(const Tensor<T>& a);
template <typename T> Tensor<T> Exp(const Tensor<T>& a);
template <typename T> Tensor<T> Log(const Tensor<T>& a);
template <typename T> Tensor<T> Abs(const Tensor<T>& a);
template <typename T> Tensor<T> Cos(const Tensor<T>& a);
// Domain [-1, 1]; the derivative is taken strictly inside it.
template <typename T> Tensor<T> Acos(const Tensor<T>& a);
template <typename T> Tensor<T> Clamp(const Tensor<T>& a, T lo, T hi);

// Reductions.
template <typename T> Tensor<T> Sum(const Tensor<T>& a);
template <typename T> Tensor<T> Mean(const Tensor<T>& a);
// Keeps the first `lead_axes` axes and averages over the rest.
template <typename T>
Tensor<T> MeanOverTrailing(const Tensor<T>& a, std::size_t lead_axes);

// Normalization over the last axis.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps = T(1e-5));
// Throws kNumeric on a zero-norm row.
template <typename T> Tensor<T> L2NormalizeLastAxis(const Tensor<T>& x);

template <typename T> Tensor<T> SoftmaxLastAxis(const Tensor<T>& x);
// Mean negative log-likelihood of `labels` under softmax(logits [n, c]).
template <typename T>
Tensor<T> CrossEntropy(const Tensor<T>& logits, std::span<const int> labels);

// x [c_in, h, w], weight [c_out, c_in, k, k]; cross-correlation, no bias.
template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& weight,
                 std::size_t stride, std::size_t padding);

inline std::size_t ConvOutputSize(std::size_t in, std::size_t kernel,
                                  std::size_t stride, std::size_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace vemb::nn

#endif  // VEMB_NN_OPS_H_
