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

#ifndef VEMB_NN_LAYERS_H_
#define VEMB_NN_LAYERS_H_

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vemb/nn/complex.h"
#include "vemb/nn/tensor.h"

namespace vemb::nn {

// Named trainable tensors of one model. Names are unique and double as
// checkpoint keys.
template <typename T>
class ParameterSet {
 public:
  Tensor<T> Register(const std::string& name, Tensor<T> tensor);

  bool Contains(const std::string& name) const {
    return index_.count(name) != 0;
  }
  Tensor<T>& Get(const std::string& name);
  const Tensor<T>& Get(const std::string& name) const;

  // Registration order.
  const std::vector<std::pair<std::string, Tensor<T>>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  std::size_t ScalarCount() const;
  void ZeroGrad();

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Per-call state shared by every layer of one forward pass.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // required when training with dropout
};

// Initializers.
template <typename T>
Tensor<T> KaimingUniform(const Shape& shape, std::size_t fan_in,
                         std::mt19937_64& rng);
template <typename T>
Tensor<T> TruncatedNormal(const Shape& shape, double stddev,
                          std::mt19937_64& rng);

template <typename T>
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(ParameterSet<T>& params, const std::string& name,
              std::size_t d_in, std::size_t d_out, std::mt19937_64& rng,
              bool bias = true);

  Tensor<T> Forward(const Tensor<T>& x) const;

  const Tensor<T>& weight() const { return weight_; }
  const Tensor<T>& bias() const { return bias_; }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
};

template <typename T>
class LayerNormLayer {
 public:
  LayerNormLayer() = default;
  LayerNormLayer(ParameterSet<T>& params, const std::string& name,
                 std::size_t dim);

  Tensor<T> Forward(const Tensor<T>& x) const;

 private:
  Tensor<T> gamma_;
  Tensor<T> beta_;
};

// Scaled dot-product self-attention over x [tokens, d_model].
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterSet<T>& params, const std::string& name,
                     std::size_t d_model, std::size_t heads,
                     std::mt19937_64& rng);

  // When `weights` is non-null it is replaced by one [tokens, tokens] softmax
  // matrix per head.
  Tensor<T> Forward(const Tensor<T>& x,
                    std::vector<Tensor<T>>* weights = nullptr) const;

  std::size_t heads() const { return heads_; }
  const LinearLayer<T>& value_proj() const { return v_; }
  const LinearLayer<T>& out_proj() const { return o_; }

 private:
  std::size_t d_model_ = 0;
  std::size_t heads_ = 0;
  LinearLayer<T> q_, k_, v_, o_;
};

// Pre-norm transformer layer: x + MHA(LN(x)), then x + MLP(LN(x)).
template <typename T>
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(ParameterSet<T>& params, const std::string& name,
                   std::size_t d_model, std::size_t hidden, std::size_t heads,
                   std::mt19937_64& rng);

  Tensor<T> Forward(const Tensor<T>& x) const;

 private:
  LayerNormLayer<T> norm1_, norm2_;
  MultiHeadAttention<T> attn_;
  LinearLayer<T> fc1_, fc2_;
};

// Complex 3x3 convolution with complex bias.
template <typename T>
class ComplexConvLayer {
 public:
  ComplexConvLayer() = default;
  ComplexConvLayer(ParameterSet<T>& params, const std::string& name,
                   std::size_t c_in, std::size_t c_out, std::size_t kernel,
                   std::size_t stride, std::size_t padding,
                   std::mt19937_64& rng);

  ComplexTensor<T> Forward(const ComplexTensor<T>& x) const;

  std::size_t in_channels() const { return c_in_; }
  std::size_t out_channels() const { return c_out_; }

 private:
  std::size_t c_in_ = 0, c_out_ = 0, stride_ = 1, padding_ = 0;
  Tensor<T> weight_real_, weight_imag_, bias_real_, bias_imag_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class LinearLayer<float>;
extern template class LinearLayer<double>;
extern template class LayerNormLayer<float>;
extern template class LayerNormLayer<double>;
extern template class MultiHeadAttention<float>;
extern template class MultiHeadAttention<double>;
extern template class TransformerBlock<float>;
extern template class TransformerBlock<double>;
extern template class ComplexConvLayer<float>;
extern template class ComplexConvLayer<double>;

}  // namespace vemb::nn

#endif  // VEMB_NN_LAYERS_H_
