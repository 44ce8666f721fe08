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

#ifndef VEMB_NN_TENSOR_H_
#define VEMB_NN_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vemb::nn {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// One vertex of the reverse-mode graph. `backward_fn` reads `grad` of the
// node it is attached to and accumulates into the parents' grads.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void EnsureGrad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

// Graph recording is on by default; a guard turns it off for the current
// thread (inference, evaluation).
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor Zeros(const Shape& shape, bool requires_grad = false);
  static Tensor Full(const Shape& shape, T fill, bool requires_grad = false);
  static Tensor FromData(const Shape& shape, std::vector<T> data,
                         bool requires_grad = false);
  static Tensor Scalar(T v) { return FromData({}, {v}); }

  // Builds an op output. Parents that do not require grad are dropped from
  // the graph; if none remain (or grad mode is off) the result is a leaf.
  static Tensor MakeResult(const Shape& shape, std::vector<T> value,
                           const std::vector<Tensor>& parents,
                           std::function<void(Node<T>&)> backward_fn);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  std::vector<T> ToVector() const { return node_->value; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  // Allocates a zero gradient on first access.
  std::span<T> grad();
  std::span<const T> grad() const { return node_->grad; }
  void ZeroGrad();

  // Reverse pass from a single-element tensor. Throws kNumeric when any
  // propagated gradient is not finite.
  void Backward();

  // Same values, no history.
  Tensor Detach() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  std::shared_ptr<Node<T>> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace vemb::nn

#endif  // VEMB_NN_TENSOR_H_
