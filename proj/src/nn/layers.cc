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

#include "vemb/nn/layers.h"

#include <cmath>

#include "vemb/error.h"
#include "vemb/nn/ops.h"

namespace vemb::nn {

template <typename T>
Tensor<T> ParameterSet<T>::Register(const std::string& name, Tensor<T> tensor) {
  Check(!name.empty() && index_.count(name) == 0, ErrorCode::kInvalidArgument,
        "duplicate or empty parameter name '" + name + "'");
  tensor.set_requires_grad(true);
  index_[name] = entries_.size();
  entries_.emplace_back(name, tensor);
  return tensor;
}

template <typename T>
Tensor<T>& ParameterSet<T>::Get(const std::string& name) {
  auto it = index_.find(name);
  Check(it != index_.end(), ErrorCode::kInvalidArgument,
        "unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

template <typename T>
const Tensor<T>& ParameterSet<T>::Get(const std::string& name) const {
  return const_cast<ParameterSet*>(this)->Get(name);
}

template <typename T>
std::size_t ParameterSet<T>::ScalarCount() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::ZeroGrad() {
  for (auto& [name, t] : entries_) t.ZeroGrad();
}

template <typename T>
Tensor<T> KaimingUniform(const Shape& shape, std::size_t fan_in,
                         std::mt19937_64& rng) {
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> data(NumElements(shape));
  for (auto& v : data) v = static_cast<T>(dist(rng));
  return Tensor<T>::FromData(shape, std::move(data));
}

template <typename T>
Tensor<T> TruncatedNormal(const Shape& shape, double stddev,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<T> data(NumElements(shape));
  for (auto& v : data) {
    double z;
    do {
      z = dist(rng);
    } while (std::abs(z) > 2.0);
    v = static_cast<T>(z * stddev);
  }
  return Tensor<T>::FromData(shape, std::move(data));
}

template <typename T>
LinearLayer<T>::LinearLayer(ParameterSet<T>& params, const std::string& name,
                            std::size_t d_in, std::size_t d_out,
                            std::mt19937_64& rng, bool bias) {
  weight_ = params.Register(name + ".weight",
                            KaimingUniform<T>({d_out, d_in}, d_in, rng));
  if (bias) bias_ = params.Register(name + ".bias", Tensor<T>::Zeros({d_out}));
}

template <typename T>
Tensor<T> LinearLayer<T>::Forward(const Tensor<T>& x) const {
  return Linear(x, weight_, bias_);
}

template <typename T>
LayerNormLayer<T>::LayerNormLayer(ParameterSet<T>& params,
                                  const std::string& name, std::size_t dim) {
  gamma_ = params.Register(name + ".gamma", Tensor<T>::Full({dim}, T(1)));
  beta_ = params.Register(name + ".beta", Tensor<T>::Zeros({dim}));
}

template <typename T>
Tensor<T> LayerNormLayer<T>::Forward(const Tensor<T>& x) const {
  return LayerNorm(x, gamma_, beta_);
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterSet<T>& params,
                                          const std::string& name,
                                          std::size_t d_model,
                                          std::size_t heads,
                                          std::mt19937_64& rng)
    : d_model_(d_model), heads_(heads) {
  Check(heads > 0 && d_model % heads == 0, ErrorCode::kInvalidArgument,
        "d_model " + std::to_string(d_model) + " not divisible by " +
            std::to_string(heads) + " heads");
  q_ = LinearLayer<T>(params, name + ".q", d_model, d_model, rng);
  k_ = LinearLayer<T>(params, name + ".k", d_model, d_model, rng);
  v_ = LinearLayer<T>(params, name + ".v", d_model, d_model, rng);
  o_ = LinearLayer<T>(params, name + ".out", d_model, d_model, rng);
}

template <typename T>
Tensor<T> MultiHeadAttention<T>::Forward(const Tensor<T>& x,
                                         std::vector<Tensor<T>>* weights) const {
  Check(x.rank() == 2 && x.dim(1) == d_model_, ErrorCode::kShapeMismatch,
        "attention input must be [tokens, " + std::to_string(d_model_) + "]");
  const std::size_t head_dim = d_model_ / heads_;
  const T scale = T(1) / std::sqrt(static_cast<T>(head_dim));
  Tensor<T> q = q_.Forward(x), k = k_.Forward(x), v = v_.Forward(x);
  std::vector<Tensor<T>> outs;
  outs.reserve(heads_);
  if (weights) weights->clear();
  for (std::size_t h = 0; h < heads_; ++h) {
    auto qh = Slice(q, 1, h * head_dim, head_dim);
    auto kh = Slice(k, 1, h * head_dim, head_dim);
    auto vh = Slice(v, 1, h * head_dim, head_dim);
    auto p = SoftmaxLastAxis(Scale(MatMul(qh, kh, true), scale));
    if (weights) weights->push_back(p);
    outs.push_back(MatMul(p, vh));
  }
  return o_.Forward(heads_ == 1 ? outs[0] : Concat(outs, 1));
}

template <typename T>
TransformerBlock<T>::TransformerBlock(ParameterSet<T>& params,
                                      const std::string& name,
                                      std::size_t d_model, std::size_t hidden,
                                      std::size_t heads, std::mt19937_64& rng)
    : norm1_(params, name + ".norm1", d_model),
      norm2_(params, name + ".norm2", d_model),
      attn_(params, name + ".attn", d_model, heads, rng),
      fc1_(params, name + ".mlp1", d_model, hidden, rng),
      fc2_(params, name + ".mlp2", hidden, d_model, rng) {}

template <typename T>
Tensor<T> TransformerBlock<T>::Forward(const Tensor<T>& x) const {
  auto h = Add(x, attn_.Forward(norm1_.Forward(x)));
  return Add(h, fc2_.Forward(Gelu(fc1_.Forward(norm2_.Forward(h)))));
}

template <typename T>
ComplexConvLayer<T>::ComplexConvLayer(ParameterSet<T>& params,
                                      const std::string& name,
                                      std::size_t c_in, std::size_t c_out,
                                      std::size_t kernel, std::size_t stride,
                                      std::size_t padding, std::mt19937_64& rng)
    : c_in_(c_in), c_out_(c_out), stride_(stride), padding_(padding) {
  const Shape w_shape{c_out, c_in, kernel, kernel};
  const std::size_t fan_in = c_in * kernel * kernel;
  weight_real_ = params.Register(name + ".weight_real",
                                 KaimingUniform<T>(w_shape, fan_in, rng));
  weight_imag_ = params.Register(name + ".weight_imag",
                                 KaimingUniform<T>(w_shape, fan_in, rng));
  bias_real_ = params.Register(name + ".bias_real", Tensor<T>::Zeros({c_out}));
  bias_imag_ = params.Register(name + ".bias_imag", Tensor<T>::Zeros({c_out}));
}

template <typename T>
ComplexTensor<T> ComplexConvLayer<T>::Forward(const ComplexTensor<T>& x) const {
  auto y = ComplexConv2d(x, weight_real_, weight_imag_, stride_, padding_);
  return {AddChannelBias(y.real, bias_real_), AddChannelBias(y.imag, bias_imag_)};
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class LinearLayer<float>;
template class LinearLayer<double>;
template class LayerNormLayer<float>;
template class LayerNormLayer<double>;
template class MultiHeadAttention<float>;
template class MultiHeadAttention<double>;
template class TransformerBlock<float>;
template class TransformerBlock<double>;
template class ComplexConvLayer<float>;
template class ComplexConvLayer<double>;
template Tensor<float> KaimingUniform<float>(const Shape&, std::size_t,
                                             std::mt19937_64&);
template Tensor<double> KaimingUniform<double>(const Shape&, std::size_t,
                                               std::mt19937_64&);
template Tensor<float> TruncatedNormal<float>(const Shape&, double,
                                              std::mt19937_64&);
template Tensor<double> TruncatedNormal<double>(const Shape&, double,
                                                std::mt19937_64&);

}  // namespace vemb::nn
