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

#include "vemb/encoders.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vemb/error.h"
#include "vemb/nn/ops.h"

namespace vemb {

using nn::ComplexTensor;
using nn::ForwardContext;
using nn::ParameterSet;
using nn::Shape;
using nn::Tensor;

std::size_t EncoderConfig::segment_samples() const {
  return static_cast<std::size_t>(std::llround(segment_seconds * sample_rate));
}

std::size_t EncoderConfig::mel_frames() const {
  return MelFrameCount(segment_samples(), mel.hop_length);
}

std::size_t EncoderConfig::pitch_frames() const {
  return PitchFrameCount(segment_samples(), sample_rate,
                         pitch.frame_period_seconds);
}

void EncoderConfig::Validate() const {
  auto need = [](bool ok, const std::string& msg) {
    Check(ok, ErrorCode::kInvalidArgument, msg);
  };
  need(sample_rate > 0 && segment_seconds > 0, "bad segment");
  need(cqt.sample_rate == sample_rate && mel.sample_rate == sample_rate &&
           pitch.sample_rate == sample_rate,
       "frontend sample rates must match the model rate");
  need(spec.channels.size() >= 2 && spec.channels.front() == 1,
       "SpecBlock channels must start at 1");
  need(spec.dropout >= 0.0 && spec.dropout < 1.0, "dropout must be in [0, 1)");
  for (const ViTConfig* v : {&mel_vit, &pitch_vit}) {
    need(v->embed_dim > 0 && v->heads > 0 && v->embed_dim % v->heads == 0,
         "ViT embed_dim must be divisible by heads");
    need(v->patch > 0 && v->layers > 0 && v->out_dim > 0 && v->hidden_dim > 0,
         "ViT sizes must be positive");
  }
  need(embedding_dim > 0, "embedding_dim must be positive");
  const double blocks = segment_seconds / cqt.block_seconds;
  need(std::abs(blocks - std::round(blocks)) < 1e-9 && blocks >= 1.0,
       "segment must be a whole number of CQT blocks");
}

Features ExtractFeatures(const Waveform& w, const EncoderConfig& cfg) {
  Check(w.sample_rate == cfg.sample_rate &&
            w.samples.size() == cfg.segment_samples(),
        ErrorCode::kInvalidArgument,
        "expected " + std::to_string(cfg.segment_samples()) + " samples at " +
            std::to_string(cfg.sample_rate) + " Hz");
  Features f;
  f.cqt = Cqt(w, cfg.cqt);
  f.mel = ComputeMelSpectrogram(w, cfg.mel);
  PitchContour contour = EstimatePitch(w, cfg.pitch);
  const bool any_voiced =
      std::find(contour.voiced.begin(), contour.voiced.end(), true) !=
      contour.voiced.end();
  if (any_voiced) {
    f.pitch = CwtPitch(ContinueContour(contour), cfg.cwt);
  } else {
    f.pitch.coeffs = Matrix(cfg.cwt.scales.size(), contour.frames());
    f.pitch.scale_values = cfg.cwt.scales;
  }
  return f;
}

namespace {

template <typename T>
Tensor<T> FromMatrix(const Matrix& m, const Shape& shape) {
  return Tensor<T>::FromData(shape, std::vector<T>(m.data.begin(), m.data.end()));
}

}  // namespace

template <typename T>
FeatureTensors<T> ToTensors(const Features& f) {
  FeatureTensors<T> t;
  const Shape cqt_shape = {1, f.cqt.bins(), f.cqt.frames()};
  t.cqt = {FromMatrix<T>(f.cqt.real, cqt_shape),
           FromMatrix<T>(f.cqt.imag, cqt_shape)};
  t.mel = FromMatrix<T>(f.mel.values, {f.mel.n_mels(), f.mel.frames()});
  t.pitch = FromMatrix<T>(f.pitch.coeffs, {f.pitch.coeffs.rows, f.pitch.coeffs.cols});
  return t;
}

template <typename T>
SpecBlockEncoder<T>::SpecBlockEncoder(ParameterSet<T>& params,
                                      const std::string& name,
                                      const SpecBlockConfig& cfg,
                                      std::mt19937_64& rng)
    : cfg_(cfg) {
  for (std::size_t b = 0; b < cfg.blocks(); ++b) {
    blocks_.emplace_back(params, name + ".block" + std::to_string(b),
                         cfg.channels[b], cfg.channels[b + 1], cfg.kernel,
                         cfg.stride, cfg.padding, rng);
  }
}

template <typename T>
Tensor<T> SpecBlockEncoder<T>::Forward(const ComplexTensor<T>& x,
                                       const ForwardContext& ctx,
                                       std::vector<Shape>* trace) const {
  Check(x.real.rank() == 3 && x.real.dim(0) == cfg_.channels.front() &&
            x.real.dim(1) > 0 && x.real.dim(2) > 0,
        ErrorCode::kShapeMismatch,
        "SpecBlock input must be [" + std::to_string(cfg_.channels.front()) +
            ", F, T], got " + nn::ShapeToString(x.real.shape()));
  Check(!ctx.training || cfg_.dropout == 0.0 || ctx.rng != nullptr,
        ErrorCode::kInvalidArgument, "training forward needs an rng");
  std::mt19937_64 unused;
  std::mt19937_64& rng = ctx.rng ? *ctx.rng : unused;
  ComplexTensor<T> h = x;
  if (trace) trace->clear();
  for (const auto& block : blocks_) {
    h = nn::ComplexDropout(nn::ComplexElu(block.Forward(h)), cfg_.dropout,
                           ctx.training, rng);
    if (trace) trace->push_back(h.shape());
  }
  return nn::MeanOverTrailing(nn::Concat<T>({h.real, h.imag}, 0), 1);
}

template <typename T>
VisionTransformer<T>::VisionTransformer(ParameterSet<T>& params,
                                        const std::string& name,
                                        const ViTConfig& cfg,
                                        std::size_t height, std::size_t width,
                                        std::mt19937_64& rng)
    : cfg_(cfg),
      height_(height),
      width_(width),
      grid_rows_((height + cfg.patch - 1) / cfg.patch),
      grid_cols_((width + cfg.patch - 1) / cfg.patch) {
  Check(height > 0 && width > 0, ErrorCode::kInvalidArgument,
        "ViT input must be non-empty");
  patch_proj_ = nn::LinearLayer<T>(params, name + ".patch", cfg.patch * cfg.patch,
                                   cfg.embed_dim, rng);
  class_token_ = params.Register(
      name + ".cls", nn::TruncatedNormal<T>({1, cfg.embed_dim}, cfg.embed_init_std, rng));
  positions_ = params.Register(
      name + ".pos", nn::TruncatedNormal<T>({patches() + 1, cfg.embed_dim},
                                            cfg.embed_init_std, rng));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    layers_.emplace_back(params, name + ".layer" + std::to_string(l),
                         cfg.embed_dim, cfg.hidden_dim, cfg.heads, rng);
  }
  final_norm_ = nn::LayerNormLayer<T>(params, name + ".norm", cfg.embed_dim);
  head_ = nn::LinearLayer<T>(params, name + ".head", cfg.embed_dim, cfg.out_dim, rng);
}

template <typename T>
Tensor<T> VisionTransformer<T>::Forward(const Tensor<T>& x) const {
  Check(x.rank() == 2 && x.dim(0) == height_ && x.dim(1) == width_,
        ErrorCode::kShapeMismatch,
        "ViT expects [" + std::to_string(height_) + ", " +
            std::to_string(width_) + "], got " + nn::ShapeToString(x.shape()));
  Tensor<T> tokens = patch_proj_.Forward(nn::Patchify(x, cfg_.patch));
  Tensor<T> h = nn::Add(nn::Concat<T>({class_token_, tokens}, 0), positions_);
  for (const auto& layer : layers_) h = layer.Forward(h);
  h = final_norm_.Forward(h);
  Tensor<T> pooled =
      cfg_.readout == ViTReadout::kClassToken
          ? nn::Reshape(nn::Slice(h, 0, 0, 1), {cfg_.embed_dim})
          : nn::MeanOverTrailing(nn::Transpose(h), 1);
  return head_.Forward(pooled);
}

template <typename T>
SpeakerEncoder<T>::SpeakerEncoder(const EncoderConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.Validate();
  std::mt19937_64 rng(seed);
  cqt_ = SpecBlockEncoder<T>(params_, "cqt", cfg_.spec, rng);
  mel_ = VisionTransformer<T>(params_, "mel", cfg_.mel_vit, cfg_.mel.n_mels,
                              cfg_.mel_frames(), rng);
  pitch_ = VisionTransformer<T>(params_, "pitch", cfg_.pitch_vit,
                                cfg_.cwt.scales.size(), cfg_.pitch_frames(), rng);
  fusion_ = nn::LinearLayer<T>(params_, "fusion", cfg_.fused_dim(),
                               cfg_.embedding_dim, rng);
}

template <typename T>
Tensor<T> SpeakerEncoder<T>::Fused(const FeatureTensors<T>& x,
                                   const ForwardContext& ctx) const {
  return nn::Concat<T>(
      {cqt_.Forward(x.cqt, ctx), mel_.Forward(x.mel), pitch_.Forward(x.pitch)}, 0);
}

template <typename T>
Tensor<T> SpeakerEncoder<T>::Forward(const FeatureTensors<T>& x,
                                     const ForwardContext& ctx) const {
  return nn::Elu(fusion_.Forward(Fused(x, ctx)));
}

template <typename T>
std::vector<double> SpeakerEncoder<T>::Embed(const Features& f) const {
  nn::NoGradGuard no_grad;
  Tensor<T> e = Forward(ToTensors<T>(f), ForwardContext{});
  return std::vector<double>(e.data().begin(), e.data().end());
}

template <typename T>
std::vector<double> SpeakerEncoder<T>::Embed(const Waveform& w) const {
  return Embed(ExtractFeatures(w, cfg_));
}

template <typename T>
std::string SpeakerEncoder<T>::Manifest(const std::string& config_hash,
                                        const std::string& config_text) const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["fusion_order"] = {kFusionOrder[0], kFusionOrder[1], kFusionOrder[2]};
  j["parameter_count"] = ParameterCount();
  j["embedding_dim"] = cfg_.embedding_dim;
  j["precision"] = sizeof(T) == 4 ? "float32" : "float64";
  j["config"] = config_text;
  return j.dump();
}

template FeatureTensors<float> ToTensors<float>(const Features&);
template FeatureTensors<double> ToTensors<double>(const Features&);
template class SpecBlockEncoder<float>;
template class SpecBlockEncoder<double>;
template class VisionTransformer<float>;
template class VisionTransformer<double>;
template class SpeakerEncoder<float>;
template class SpeakerEncoder<double>;

}  // namespace vemb
