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

#include "vemb/losses.h"

#include <cmath>
#include <numbers>

#include "vemb/error.h"
#include "vemb/nn/ops.h"

namespace vemb {

using nn::Tensor;

void MarginConfig::Validate() const {
  Check(scale > 0.0, ErrorCode::kInvalidArgument, "margin scale must be > 0");
  const double upper = kind == MarginKind::kAmSoftmax ? 1.0 : std::numbers::pi / 2;
  Check(margin >= 0.0 && margin < upper, ErrorCode::kInvalidArgument,
        "margin out of range for " + MarginKindName(kind));
}

MarginKind ParseMarginKind(const std::string& name) {
  if (name == "am_softmax" || name == "am") return MarginKind::kAmSoftmax;
  if (name == "arcface" || name == "arc") return MarginKind::kArcFace;
  Fail(ErrorCode::kInvalidArgument, "unknown loss '" + name + "'");
}

std::string MarginKindName(MarginKind kind) {
  return kind == MarginKind::kAmSoftmax ? "am_softmax" : "arcface";
}

namespace {

template <typename T>
Tensor<T> OneHot(std::span<const int> labels, std::size_t classes) {
  std::vector<T> v(labels.size() * classes, T(0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Check(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
          ErrorCode::kInvalidArgument,
          "label " + std::to_string(labels[i]) + " outside [0, " +
              std::to_string(classes) + ")");
    v[i * classes + labels[i]] = T(1);
  }
  return Tensor<T>::FromData({labels.size(), classes}, std::move(v));
}

template <typename T>
void CheckBatch(const Tensor<T>& f, const Tensor<T>& w,
                std::span<const int> labels) {
  Check(f.rank() == 2 && w.rank() == 2 && f.dim(1) == w.dim(0),
        ErrorCode::kShapeMismatch,
        "embeddings " + nn::ShapeToString(f.shape()) + " vs head " +
            nn::ShapeToString(w.shape()));
  Check(f.dim(0) >= 1 && labels.size() == f.dim(0), ErrorCode::kInvalidArgument,
        "need one label per embedding row");
}

}  // namespace

template <typename T>
Tensor<T> CosineLogits(const Tensor<T>& f, const Tensor<T>& w) {
  return nn::MatMul(nn::L2NormalizeLastAxis(f),
                    nn::L2NormalizeLastAxis(nn::Transpose(w)), true);
}

template <typename T>
Tensor<T> AmSoftmaxLoss(const Tensor<T>& f, const Tensor<T>& w,
                        std::span<const int> labels, double scale,
                        double margin) {
  CheckBatch(f, w, labels);
  const Tensor<T> onehot = OneHot<T>(labels, w.dim(1));
  Tensor<T> cos = CosineLogits(f, w);
  Tensor<T> logits = nn::Scale(
      nn::Sub(cos, nn::Scale(onehot, static_cast<T>(margin))), static_cast<T>(scale));
  return nn::CrossEntropy(logits, labels);
}

template <typename T>
Tensor<T> ArcFaceLoss(const Tensor<T>& f, const Tensor<T>& w,
                      std::span<const int> labels, double scale,
                      double margin) {
  CheckBatch(f, w, labels);
  const std::size_t c = w.dim(1);
  const Tensor<T> onehot = OneHot<T>(labels, c);
  Tensor<T> cos = CosineLogits(f, w);
  // Target cosine per row as an [n, 1] column.
  Tensor<T> target = nn::MatMul(nn::Mul(cos, onehot), Tensor<T>::Full({c, 1}, T(1)));
  const T limit = T(1) - static_cast<T>(1e-7);
  Tensor<T> theta = nn::Acos(nn::Clamp(target, -limit, limit));
  Tensor<T> shifted = nn::Cos(nn::Affine(theta, T(1), static_cast<T>(margin)));
  // Replace the target entry: cos + onehot * (shifted - target).
  Tensor<T> delta = nn::MatMul(nn::Sub(shifted, target), Tensor<T>::Full({1, c}, T(1)));
  Tensor<T> logits = nn::Add(cos, nn::Mul(onehot, delta));
  return nn::CrossEntropy(nn::Scale(logits, static_cast<T>(scale)), labels);
}

template <typename T>
MarginHead<T>::MarginHead(nn::ParameterSet<T>& params, const std::string& name,
                          std::size_t dim, std::size_t classes,
                          const MarginConfig& cfg, std::mt19937_64& rng)
    : cfg_(cfg) {
  cfg_.Validate();
  Check(classes >= 1 && dim >= 1, ErrorCode::kInvalidArgument,
        "margin head needs at least one class");
  weight_ = params.Register(name + ".weight",
                            nn::KaimingUniform<T>({dim, classes}, dim, rng));
}

template <typename T>
Tensor<T> MarginHead<T>::Loss(const Tensor<T>& f,
                              std::span<const int> labels) const {
  return cfg_.kind == MarginKind::kAmSoftmax
             ? AmSoftmaxLoss(f, weight_, labels, cfg_.scale, cfg_.margin)
             : ArcFaceLoss(f, weight_, labels, cfg_.scale, cfg_.margin);
}

#define VEMB_INSTANTIATE_LOSSES(T)                                           \
  template Tensor<T> CosineLogits(const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> AmSoftmaxLoss(const Tensor<T>&, const Tensor<T>&,       \
                                   std::span<const int>, double, double);    \
  template Tensor<T> ArcFaceLoss(const Tensor<T>&, const Tensor<T>&,         \
                                 std::span<const int>, double, double);      \
  template class MarginHead<T>;

VEMB_INSTANTIATE_LOSSES(float)
VEMB_INSTANTIATE_LOSSES(double)

#undef VEMB_INSTANTIATE_LOSSES

}  // namespace vemb
