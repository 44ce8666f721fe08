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

#ifndef VEMB_LOSSES_H_
#define VEMB_LOSSES_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "vemb/nn/layers.h"
#include "vemb/nn/tensor.h"

namespace vemb {

enum class MarginKind { kAmSoftmax, kArcFace };

struct MarginConfig {
  MarginKind kind = MarginKind::kAmSoftmax;
  double scale = 30.0;
  double margin = 0.4;

  static MarginConfig AmSoftmax() { return {MarginKind::kAmSoftmax, 30.0, 0.4}; }
  static MarginConfig ArcFace() { return {MarginKind::kArcFace, 30.0, 0.5}; }
  void Validate() const;
};

MarginKind ParseMarginKind(const std::string& name);
std::string MarginKindName(MarginKind kind);

// Cosine logits between L2-normalized rows of f [n, d] and L2-normalized
// columns of w [d, c]: [n, c].
template <typename T>
nn::Tensor<T> CosineLogits(const nn::Tensor<T>& f, const nn::Tensor<T>& w);

// -1/n sum log softmax(s * (cos - m * onehot))[y]. Zero-norm rows or columns
// raise kNumeric; labels outside [0, c) raise kInvalidArgument.
template <typename T>
nn::Tensor<T> AmSoftmaxLoss(const nn::Tensor<T>& f, const nn::Tensor<T>& w,
                            std::span<const int> labels, double scale,
                            double margin);

// Target logit cos(acos(clamp(cos_y, -1 + 1e-7, 1 - 1e-7)) + m).
template <typename T>
nn::Tensor<T> ArcFaceLoss(const nn::Tensor<T>& f, const nn::Tensor<T>& w,
                          std::span<const int> labels, double scale,
                          double margin);

// Classification head holding W [d, classes].
template <typename T>
class MarginHead {
 public:
  MarginHead() = default;
  MarginHead(nn::ParameterSet<T>& params, const std::string& name,
             std::size_t dim, std::size_t classes, const MarginConfig& cfg,
             std::mt19937_64& rng);

  nn::Tensor<T> Loss(const nn::Tensor<T>& f, std::span<const int> labels) const;
  const nn::Tensor<T>& weight() const { return weight_; }
  const MarginConfig& config() const { return cfg_; }

 private:
  MarginConfig cfg_;
  nn::Tensor<T> weight_;
};

extern template class MarginHead<float>;
extern template class MarginHead<double>;

}  // namespace vemb

#endif  // VEMB_LOSSES_H_
