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

#include "vemb/nn/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vemb/error.h"

namespace vemb::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
std::vector<T>* ParentGrad(Node<T>& self, std::size_t i) {
  Node<T>& p = *self.parents[i];
  if (!p.requires_grad) return nullptr;
  p.EnsureGrad();
  return &p.grad;
}

template <typename T>
void RequireSameShape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  Check(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
        std::string(op) + ": " + ShapeToString(a.shape()) + " vs " +
            ShapeToString(b.shape()));
}

// f(x) forward, df(x, y) derivative given input and output.
template <typename T, typename F, typename D>
Tensor<T> Unary(const Tensor<T>& a, F f, D df) {
  auto in = a.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return Tensor<T>::MakeResult(a.shape(), std::move(out), {a},
                               [df](Node<T>& self) {
    auto* g = ParentGrad(self, 0);
    if (!g) return;
    const auto& x = self.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*g)[i] += self.grad[i] * df(x[i], self.value[i]);
    }
  });
}

std::size_t Product(const Shape& s, std::size_t begin, std::size_t end) {
  std::size_t n = 1;
  for (std::size_t i = begin; i < end; ++i) n *= s[i];
  return n;
}

}  // namespace

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Add");
  auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor<T>::MakeResult(a.shape(), std::move(out), {a, b},
                               [](Node<T>& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = ParentGrad(self, p)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Sub");
  auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return Tensor<T>::MakeResult(a.shape(), std::move(out), {a, b},
                               [](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Mul");
  auto x = a.data(), y = b.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Tensor<T>::MakeResult(a.shape(), std::move(out), {a, b},
                               [](Node<T>& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    }
    if (auto* g = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
    }
  });
}

template <typename T>
Tensor<T> Affine(const Tensor<T>& a, T alpha, T beta) {
  return Unary(a, [alpha, beta](T x) { return alpha * x + beta; },
               [alpha](T, T) { return alpha; });
}

template <typename T>
Tensor<T> AddBias(const Tensor<T>& x, const Tensor<T>& b) {
  Check(b.rank() == 1 && x.rank() >= 1 && x.shape().back() == b.dim(0),
        ErrorCode::kShapeMismatch,
        "AddBias: " + ShapeToString(x.shape()) + " + " +
            ShapeToString(b.shape()));
  const std::size_t d = b.dim(0);
  auto in = x.data(), bias = b.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + bias[i % d];
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x, b},
                               [d](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        (*g)[i % d] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> AddChannelBias(const Tensor<T>& x, const Tensor<T>& b) {
  Check(b.rank() == 1 && x.rank() >= 1 && x.dim(0) == b.dim(0),
        ErrorCode::kShapeMismatch,
        "AddChannelBias: " + ShapeToString(x.shape()) + " + " +
            ShapeToString(b.shape()));
  const std::size_t inner = x.numel() / x.dim(0);
  auto in = x.data(), bias = b.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + bias[i / inner];
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x, b},
                               [inner](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = ParentGrad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        (*g)[i / inner] += self.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  Check(a.rank() == 2 && b.rank() == 2, ErrorCode::kShapeMismatch,
        "MatMul needs 2-D operands");
  const std::size_t m = a.dim(0), k = a.dim(1);
  const std::size_t kb = transpose_b ? b.dim(1) : b.dim(0);
  const std::size_t n = transpose_b ? b.dim(0) : b.dim(1);
  Check(k == kb, ErrorCode::kShapeMismatch,
        "MatMul: " + ShapeToString(a.shape()) + " x " +
            ShapeToString(b.shape()) + (transpose_b ? "^T" : ""));
  std::vector<T> out(m * n);
  ConstMatMap<T> A(a.data().data(), m, k);
  ConstMatMap<T> B(b.data().data(), b.dim(0), b.dim(1));
  MatMap<T> C(out.data(), m, n);
  if (transpose_b) {
    C.noalias() = A * B.transpose();
  } else {
    C.noalias() = A * B;
  }
  return Tensor<T>::MakeResult({m, n}, std::move(out), {a, b},
                               [m, k, n, transpose_b](Node<T>& self) {
    ConstMatMap<T> dC(self.grad.data(), m, n);
    const auto& pa = *self.parents[0];
    const auto& pb = *self.parents[1];
    ConstMatMap<T> A(pa.value.data(), m, k);
    ConstMatMap<T> B(pb.value.data(), pb.shape[0], pb.shape[1]);
    if (auto* g = ParentGrad(self, 0)) {
      MatMap<T> dA(g->data(), m, k);
      if (transpose_b) {
        dA.noalias() += dC * B;
      } else {
        dA.noalias() += dC * B.transpose();
      }
    }
    if (auto* g = ParentGrad(self, 1)) {
      MatMap<T> dB(g->data(), pb.shape[0], pb.shape[1]);
      if (transpose_b) {
        dB.noalias() += dC.transpose() * A;
      } else {
        dB.noalias() += A.transpose() * dC;
      }
    }
  });
}

template <typename T>
Tensor<T> Transpose(const Tensor<T>& a) {
  Check(a.rank() == 2, ErrorCode::kShapeMismatch, "Transpose needs 2-D");
  const std::size_t r = a.dim(0), c = a.dim(1);
  auto in = a.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return Tensor<T>::MakeResult({c, r}, std::move(out), {a},
                               [r, c](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          (*g)[i * c + j] += self.grad[j * r + i];
    }
  });
}

template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  Check(weight.rank() == 2, ErrorCode::kShapeMismatch,
        "Linear weight must be [d_out, d_in]");
  const bool vector_input = x.rank() == 1;
  Tensor<T> x2 = vector_input ? Reshape(x, {1, x.dim(0)}) : x;
  Tensor<T> y = MatMul(x2, weight, true);
  if (bias.defined()) y = AddBias(y, bias);
  return vector_input ? Reshape(y, {weight.dim(0)}) : y;
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, const Shape& shape) {
  Check(NumElements(shape) == a.numel(), ErrorCode::kShapeMismatch,
        "Reshape " + ShapeToString(a.shape()) + " -> " + ShapeToString(shape));
  std::vector<T> out(a.data().begin(), a.data().end());
  return Tensor<T>::MakeResult(shape, std::move(out), {a}, [](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> Concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  Check(!parts.empty(), ErrorCode::kInvalidArgument, "Concat of nothing");
  const Shape& first = parts[0].shape();
  Check(axis < first.size(), ErrorCode::kShapeMismatch, "Concat axis");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    Check(p.rank() == first.size(), ErrorCode::kShapeMismatch,
          "Concat rank mismatch");
    for (std::size_t d = 0; d < first.size(); ++d) {
      Check(d == axis || p.dim(d) == first[d], ErrorCode::kShapeMismatch,
            "Concat: " + ShapeToString(p.shape()) + " vs " +
                ShapeToString(first));
    }
    out_shape[axis] += p.dim(axis);
  }
  const std::size_t outer = Product(first, 0, axis);
  const std::size_t inner = Product(first, axis + 1, first.size());
  const std::size_t row = out_shape[axis] * inner;
  std::vector<std::size_t> widths;
  std::vector<T> out(NumElements(out_shape));
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(axis) * inner;
    widths.push_back(w);
    auto src = p.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.begin() + o * w, w, out.begin() + o * row + offset);
    }
    offset += w;
  }
  return Tensor<T>::MakeResult(out_shape, std::move(out), parts,
                               [outer, row, widths](Node<T>& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < widths.size(); ++p) {
      const std::size_t w = widths[p];
      if (auto* g = ParentGrad(self, p)) {
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t i = 0; i < w; ++i)
            (*g)[o * w + i] += self.grad[o * row + offset + i];
      }
      offset += w;
    }
  });
}

template <typename T>
Tensor<T> Slice(const Tensor<T>& a, std::size_t axis, std::size_t start,
                std::size_t length) {
  Check(axis < a.rank() && start + length <= a.dim(axis),
        ErrorCode::kShapeMismatch,
        "Slice out of range on " + ShapeToString(a.shape()));
  const Shape& s = a.shape();
  const std::size_t outer = Product(s, 0, axis);
  const std::size_t inner = Product(s, axis + 1, s.size());
  const std::size_t row = s[axis] * inner;
  const std::size_t w = length * inner;
  const std::size_t off = start * inner;
  Shape out_shape = s;
  out_shape[axis] = length;
  std::vector<T> out(outer * w);
  auto src = a.data();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(src.begin() + o * row + off, w, out.begin() + o * w);
  }
  return Tensor<T>::MakeResult(out_shape, std::move(out), {a},
                               [outer, row, w, off](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < w; ++i)
          (*g)[o * row + off + i] += self.grad[o * w + i];
    }
  });
}

template <typename T>
Tensor<T> Patchify(const Tensor<T>& x, std::size_t patch) {
  Check(x.rank() == 2 && patch > 0, ErrorCode::kShapeMismatch,
        "Patchify needs a 2-D input, got " + ShapeToString(x.shape()));
  const std::size_t h = x.dim(0), w = x.dim(1);
  const std::size_t gh = (h + patch - 1) / patch, gw = (w + patch - 1) / patch;
  const std::size_t pp = patch * patch;
  // For each output element, the flat source index or -1 for padding.
  std::vector<std::ptrdiff_t> src_index(gh * gw * pp, -1);
  std::vector<T> out(src_index.size(), T(0));
  auto src = x.data();
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx)
      for (std::size_t dy = 0; dy < patch; ++dy)
        for (std::size_t dx = 0; dx < patch; ++dx) {
          const std::size_t r = gy * patch + dy, c = gx * patch + dx;
          if (r >= h || c >= w) continue;
          const std::size_t o = ((gy * gw + gx) * patch + dy) * patch + dx;
          src_index[o] = static_cast<std::ptrdiff_t>(r * w + c);
          out[o] = src[r * w + c];
        }
  return Tensor<T>::MakeResult(
      {gh * gw, pp}, std::move(out), {x},
      [idx = std::move(src_index)](Node<T>& self) {
        if (auto* g = ParentGrad(self, 0)) {
          for (std::size_t o = 0; o < idx.size(); ++o)
            if (idx[o] >= 0) (*g)[idx[o]] += self.grad[o];
        }
      });
}

template <typename T>
Tensor<T> Elu(const Tensor<T>& a, T alpha) {
  return Unary(
      a, [alpha](T x) { return x > T(0) ? x : alpha * std::expm1(x); },
      [alpha](T x, T y) { return x > T(0) ? T(1) : y + alpha; });
}

template <typename T>
Tensor<T> Gelu(const Tensor<T>& a) {
  constexpr T kInvSqrt2 = T(1) / std::numbers::sqrt2_v<T>;
  constexpr T kInvSqrt2Pi = std::numbers::inv_sqrtpi_v<T> * kInvSqrt2;
  return Unary(
      a, [](T x) { return T(0.5) * x * (T(1) + std::erf(x * kInvSqrt2)); },
      [](T x, T) {
        return T(0.5) * (T(1) + std::erf(x * kInvSqrt2)) +
               x * kInvSqrt2Pi * std::exp(T(-0.5) * x * x);
      });
}

template <typename T>
Tensor<T> Softplus(const Tensor<T>& a) {
  return Unary(
      a,
      [](T x) {
        return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      },
      [](T x, T) { return T(1) / (T(1) + std::exp(-x)); });
}

template <typename T>
Tensor<T> Exp(const Tensor<T>& a) {
  return Unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> Log(const Tensor<T>& a) {
  return Unary(a, [](T x) { return std::log(x); },
               [](T x, T) { return T(1) / x; });
}

template <typename T>
Tensor<T> Abs(const Tensor<T>& a) {
  return Unary(a, [](T x) { return std::abs(x); },
               [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> Cos(const Tensor<T>& a) {
  return Unary(a, [](T x) { return std::cos(x); },
               [](T x, T) { return -std::sin(x); });
}

template <typename T>
Tensor<T> Acos(const Tensor<T>& a) {
  return Unary(a, [](T x) { return std::acos(x); },
               [](T x, T) { return T(-1) / std::sqrt(T(1) - x * x); });
}

template <typename T>
Tensor<T> Clamp(const Tensor<T>& a, T lo, T hi) {
  return Unary(a, [lo, hi](T x) { return std::clamp(x, lo, hi); },
               [lo, hi](T x, T) { return (x > lo && x < hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& a) {
  T s = 0;
  for (T v : a.data()) s += v;
  return Tensor<T>::MakeResult({}, {s}, {a}, [](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (auto& v : *g) v += self.grad[0];
    }
  });
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& a) {
  return Scale(Sum(a), T(1) / static_cast<T>(a.numel()));
}

template <typename T>
Tensor<T> MeanOverTrailing(const Tensor<T>& a, std::size_t lead_axes) {
  Check(lead_axes <= a.rank(), ErrorCode::kShapeMismatch, "MeanOverTrailing");
  Shape out_shape(a.shape().begin(), a.shape().begin() + lead_axes);
  const std::size_t lead = NumElements(out_shape);
  const std::size_t inner = a.numel() / lead;
  auto in = a.data();
  std::vector<T> out(lead, T(0));
  for (std::size_t o = 0; o < lead; ++o) {
    T s = 0;
    for (std::size_t i = 0; i < inner; ++i) s += in[o * inner + i];
    out[o] = s / static_cast<T>(inner);
  }
  return Tensor<T>::MakeResult(out_shape, std::move(out), {a},
                               [inner](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      const T scale = T(1) / static_cast<T>(inner);
      for (std::size_t i = 0; i < g->size(); ++i)
        (*g)[i] += self.grad[i / inner] * scale;
    }
  });
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps) {
  Check(x.rank() >= 1, ErrorCode::kShapeMismatch, "LayerNorm on scalar");
  const std::size_t d = x.shape().back();
  Check(gamma.numel() == d && beta.numel() == d, ErrorCode::kShapeMismatch,
        "LayerNorm affine size");
  const std::size_t rows = x.numel() / d;
  auto in = x.data(), g = gamma.data(), b = beta.data();
  std::vector<T> out(in.size());
  std::vector<T> xhat(in.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = in.data() + r * d;
    T mean = 0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<T>(d);
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (row[j] - mean) * inv_std[r];
      out[r * d + j] = g[j] * xhat[r * d + j] + b[j];
    }
  }
  return Tensor<T>::MakeResult(
      x.shape(), std::move(out), {x, gamma, beta},
      [d, rows, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Node<T>& self) {
        const auto& gv = self.parents[1]->value;
        if (auto* gx = ParentGrad(self, 0)) {
          std::vector<T> dxhat(d);
          for (std::size_t r = 0; r < rows; ++r) {
            T m1 = 0, m2 = 0;
            for (std::size_t j = 0; j < d; ++j) {
              dxhat[j] = self.grad[r * d + j] * gv[j];
              m1 += dxhat[j];
              m2 += dxhat[j] * xhat[r * d + j];
            }
            m1 /= static_cast<T>(d);
            m2 /= static_cast<T>(d);
            for (std::size_t j = 0; j < d; ++j) {
              (*gx)[r * d + j] +=
                  inv_std[r] * (dxhat[j] - m1 - xhat[r * d + j] * m2);
            }
          }
        }
        if (auto* gg = ParentGrad(self, 1)) {
          for (std::size_t i = 0; i < self.grad.size(); ++i)
            (*gg)[i % d] += self.grad[i] * xhat[i];
        }
        if (auto* gb = ParentGrad(self, 2)) {
          for (std::size_t i = 0; i < self.grad.size(); ++i)
            (*gb)[i % d] += self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> L2NormalizeLastAxis(const Tensor<T>& x) {
  Check(x.rank() >= 1, ErrorCode::kShapeMismatch, "L2Normalize on scalar");
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.numel() / d;
  auto in = x.data();
  std::vector<T> out(in.size());
  std::vector<T> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    T s = 0;
    for (std::size_t j = 0; j < d; ++j) s += in[r * d + j] * in[r * d + j];
    norms[r] = std::sqrt(s);
    Check(norms[r] > T(0), ErrorCode::kNumeric,
          "zero-norm vector cannot be normalized (row " + std::to_string(r) +
              ")");
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = in[r * d + j] / norms[r];
  }
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x},
                               [d, rows, norms = std::move(norms)](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        T dot = 0;
        for (std::size_t j = 0; j < d; ++j)
          dot += self.grad[r * d + j] * self.value[r * d + j];
        for (std::size_t j = 0; j < d; ++j)
          (*g)[r * d + j] +=
              (self.grad[r * d + j] - self.value[r * d + j] * dot) / norms[r];
      }
    }
  });
}

template <typename T>
Tensor<T> SoftmaxLastAxis(const Tensor<T>& x) {
  Check(x.rank() >= 1, ErrorCode::kShapeMismatch, "Softmax on scalar");
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.numel() / d;
  auto in = x.data();
  std::vector<T> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = in.data() + r * d;
    T mx = *std::max_element(row, row + d);
    T s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      out[r * d + j] = std::exp(row[j] - mx);
      s += out[r * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] /= s;
  }
  return Tensor<T>::MakeResult(x.shape(), std::move(out), {x},
                               [d, rows](Node<T>& self) {
    if (auto* g = ParentGrad(self, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        T dot = 0;
        for (std::size_t j = 0; j < d; ++j)
          dot += self.grad[r * d + j] * self.value[r * d + j];
        for (std::size_t j = 0; j < d; ++j)
          (*g)[r * d + j] += self.value[r * d + j] * (self.grad[r * d + j] - dot);
      }
    }
  });
}

template <typename T>
Tensor<T> CrossEntropy(const Tensor<T>& logits, std::span<const int> labels) {
  Check(logits.rank() == 2, ErrorCode::kShapeMismatch,
        "CrossEntropy logits must be [n, c]");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  Check(labels.size() == n && n > 0, ErrorCode::kShapeMismatch,
        "CrossEntropy: label count does not match batch");
  for (int y : labels) {
    Check(y >= 0 && static_cast<std::size_t>(y) < c,
          ErrorCode::kInvalidArgument,
          "label " + std::to_string(y) + " outside [0, " + std::to_string(c) +
              ")");
  }
  auto in = logits.data();
  std::vector<T> probs(in.size());
  T loss = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const T* row = in.data() + r * c;
    T mx = *std::max_element(row, row + c);
    T s = 0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - mx);
    const T log_z = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) probs[r * c + j] = std::exp(row[j] - log_z);
    loss -= row[labels[r]] - log_z;
  }
  loss /= static_cast<T>(n);
  std::vector<int> ys(labels.begin(), labels.end());
  return Tensor<T>::MakeResult(
      {}, {loss}, {logits},
      [n, c, ys = std::move(ys), probs = std::move(probs)](Node<T>& self) {
        if (auto* g = ParentGrad(self, 0)) {
          const T scale = self.grad[0] / static_cast<T>(n);
          for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
              T target = static_cast<std::size_t>(ys[r]) == j ? T(1) : T(0);
              (*g)[r * c + j] += scale * (probs[r * c + j] - target);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& weight,
                 std::size_t stride, std::size_t padding) {
  Check(x.rank() == 3 && weight.rank() == 4 && weight.dim(1) == x.dim(0) &&
            weight.dim(2) == weight.dim(3),
        ErrorCode::kShapeMismatch,
        "Conv2d: input " + ShapeToString(x.shape()) + ", weight " +
            ShapeToString(weight.shape()));
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  Check(h + 2 * padding >= k && w + 2 * padding >= k && stride > 0,
        ErrorCode::kShapeMismatch, "Conv2d: input smaller than kernel");
  const std::size_t ho = ConvOutputSize(h, k, stride, padding);
  const std::size_t wo = ConvOutputSize(w, k, stride, padding);
  const std::size_t patch = cin * k * k;
  const std::size_t cols_n = ho * wo;

  // im2col: cols[(c, ky, kx), (oy, ox)]
  std::vector<T> cols(patch * cols_n, T(0));
  auto in = x.data();
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* dst = cols.data() + ((c * k + ky) * k + kx) * cols_n;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                static_cast<std::ptrdiff_t>(padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            dst[oy * wo + ox] = in[(c * h + iy) * w + ix];
          }
        }
      }
    }
  }
  std::vector<T> out(cout * cols_n);
  {
    ConstMatMap<T> W(weight.data().data(), cout, patch);
    ConstMatMap<T> C(cols.data(), patch, cols_n);
    MatMap<T> O(out.data(), cout, cols_n);
    O.noalias() = W * C;
  }
  return Tensor<T>::MakeResult(
      {cout, ho, wo}, std::move(out), {x, weight},
      [=, cols = std::move(cols)](Node<T>& self) {
        ConstMatMap<T> dO(self.grad.data(), cout, cols_n);
        if (auto* gw = ParentGrad(self, 1)) {
          ConstMatMap<T> C(cols.data(), patch, cols_n);
          MatMap<T> dW(gw->data(), cout, patch);
          dW.noalias() += dO * C.transpose();
        }
        if (auto* gx = ParentGrad(self, 0)) {
          ConstMatMap<T> W(self.parents[1]->value.data(), cout, patch);
          RowMat<T> dcols = W.transpose() * dO;
          for (std::size_t c = 0; c < cin; ++c) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                const T* src = dcols.data() + ((c * k + ky) * k + kx) * cols_n;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                  const std::ptrdiff_t iy =
                      static_cast<std::ptrdiff_t>(oy * stride + ky) -
                      static_cast<std::ptrdiff_t>(padding);
                  if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                  for (std::size_t ox = 0; ox < wo; ++ox) {
                    const std::ptrdiff_t ix =
                        static_cast<std::ptrdiff_t>(ox * stride + kx) -
                        static_cast<std::ptrdiff_t>(padding);
                    if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                    (*gx)[(c * h + iy) * w + ix] += src[oy * wo + ox];
                  }
                }
              }
            }
          }
        }
      });
}

#define VEMB_INSTANTIATE_OPS(T)                                              \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> Sub(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                \
  template Tensor<T> Affine(const Tensor<T>&, T, T);                         \
  template Tensor<T> AddBias(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> AddChannelBias(const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> MatMul(const Tensor<T>&, const Tensor<T>&, bool);       \
  template Tensor<T> Transpose(const Tensor<T>&);                            \
  template Tensor<T> Linear(const Tensor<T>&, const Tensor<T>&,              \
                            const Tensor<T>&);                               \
  template Tensor<T> Reshape(const Tensor<T>&, const Shape&);                \
  template Tensor<T> Concat(const std::vector<Tensor<T>>&, std::size_t);     \
  template Tensor<T> Slice(const Tensor<T>&, std::size_t, std::size_t,       \
                           std::size_t);                                     \
  template Tensor<T> Patchify(const Tensor<T>&, std::size_t);               \
  template Tensor<T> Elu(const Tensor<T>&, T);                               \
  template Tensor<T> Gelu(const Tensor<T>&);                                 \
  template Tensor<T> Softplus(const Tensor<T>&);                             \
  template Tensor<T> Exp(const Tensor<T>&);                                  \
  template Tensor<T> Log(const Tensor<T>&);                                  \
  template Tensor<T> Abs(const Tensor<T>&);                                  \
  template Tensor<T> Cos(const Tensor<T>&);                                  \
  template Tensor<T> Acos(const Tensor<T>&);                                 \
  template Tensor<T> Clamp(const Tensor<T>&, T, T);                          \
  template Tensor<T> Sum(const Tensor<T>&);                                  \
  template Tensor<T> Mean(const Tensor<T>&);                                 \
  template Tensor<T> MeanOverTrailing(const Tensor<T>&, std::size_t);        \
  template Tensor<T> LayerNorm(const Tensor<T>&, const Tensor<T>&,           \
                               const Tensor<T>&, T);                         \
  template Tensor<T> L2NormalizeLastAxis(const Tensor<T>&);                  \
  template Tensor<T> SoftmaxLastAxis(const Tensor<T>&);                      \
  template Tensor<T> CrossEntropy(const Tensor<T>&, std::span<const int>);   \
  template Tensor<T> Conv2d(const Tensor<T>&, const Tensor<T>&, std::size_t, \
                            std::size_t);

VEMB_INSTANTIATE_OPS(float)
VEMB_INSTANTIATE_OPS(double)

#undef VEMB_INSTANTIATE_OPS

}  // namespace vemb::nn
