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

#include "vemb/nn/tensor.h"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "vemb/error.h"

namespace vemb::nn {

namespace {
thread_local bool g_grad_enabled = true;

template <typename T>
void CheckFinite(std::span<const T> values, const char* what) {
  for (T v : values) {
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kNumeric, std::string("non-finite value in ") + what);
    }
  }
}
}  // namespace

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T> Tensor<T>::Zeros(const Shape& shape, bool requires_grad) {
  return Full(shape, T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::Full(const Shape& shape, T fill, bool requires_grad) {
  return FromData(shape, std::vector<T>(NumElements(shape), fill),
                  requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::FromData(const Shape& shape, std::vector<T> data,
                              bool requires_grad) {
  Check(data.size() == NumElements(shape), ErrorCode::kShapeMismatch,
        "data length " + std::to_string(data.size()) + " does not match " +
            ShapeToString(shape));
  CheckFinite<T>(data, "tensor data");
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::MakeResult(const Shape& shape, std::vector<T> value,
                                const std::vector<Tensor>& parents,
                                std::function<void(Node<T>&)> backward_fn) {
  CheckFinite<T>(value, "forward output");
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const Tensor& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const Tensor& p : parents) node->parents.push_back(p.node_);
      node->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor(std::move(node));
}

template <typename T>
T Tensor<T>::item() const {
  Check(numel() == 1, ErrorCode::kShapeMismatch,
        "item() on tensor of shape " + ShapeToString(shape()));
  return node_->value[0];
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  node_->EnsureGrad();
  return node_->grad;
}

template <typename T>
void Tensor<T>::ZeroGrad() {
  node_->grad.assign(node_->value.size(), T(0));
}

template <typename T>
void Tensor<T>::Backward() {
  Check(numel() == 1, ErrorCode::kShapeMismatch,
        "Backward() needs a single-element root");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->EnsureGrad();
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && !n->grad.empty()) {
      CheckFinite<T>(n->grad, "gradient");
      n->backward_fn(*n);
    }
  }
  for (Node<T>* n : order) {
    if (n->parents.empty()) CheckFinite<T>(n->grad, "leaf gradient");
  }
}

template <typename T>
Tensor<T> Tensor<T>::Detach() const {
  return FromData(node_->shape, node_->value, false);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace vemb::nn
