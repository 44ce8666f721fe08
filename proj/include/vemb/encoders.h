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

#ifndef VEMB_ENCODERS_H_
#define VEMB_ENCODERS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vemb/audio.h"
#include "vemb/frontends.h"
#include "vemb/nn/complex.h"
#include "vemb/nn/layers.h"
#include "vemb/nn/tensor.h"

namespace vemb {

struct SpecBlockConfig {
  // Block i maps channels[i] -> channels[i + 1].
  std::vector<std::size_t> channels = {1,  32,  32,  32,  32, 64,
                                       64, 128, 128, 128, 128};
  std::size_t kernel = 3;
  std::size_t stride = 2;
  std::size_t padding = 1;
  double dropout = 0.4;

  std::size_t blocks() const { return channels.size() - 1; }
  std::size_t out_dim() const { return 2 * channels.back(); }
};

enum class ViTReadout { kClassToken, kMean };

struct ViTConfig {
  std::size_t embed_dim = 256;
  std::size_t hidden_dim = 512;
  std::size_t heads = 32;
  std::size_t layers = 3;
  std::size_t out_dim = 512;
  std::size_t patch = 16;
  ViTReadout readout = ViTReadout::kClassToken;
  double embed_init_std = 0.02;
};

struct EncoderConfig {
  CqtConfig cqt;
  MelConfig mel;
  PitchConfig pitch;
  CwtConfig cwt;
  SpecBlockConfig spec;
  ViTConfig mel_vit;
  ViTConfig pitch_vit = [] {
    ViTConfig v;
    v.patch = 9;
    return v;
  }();
  std::size_t embedding_dim = 2048;
  double segment_seconds = 4.0;
  int sample_rate = 24000;

  std::size_t segment_samples() const;
  // Feature image sizes implied by the segment length.
  std::size_t mel_frames() const;
  std::size_t pitch_frames() const;
  std::size_t fused_dim() const {
    return spec.out_dim() + mel_vit.out_dim + pitch_vit.out_dim;
  }
  // Throws kInvalidArgument on inconsistent settings.
  void Validate() const;
};

inline constexpr const char* kFusionOrder[] = {"cqt", "mel", "pitch"};

struct Features {
  ComplexSpectrogram cqt;
  MelSpectrogram mel;
  PitchSpectrogram pitch;
};

// `w` must already be at cfg.sample_rate with exactly segment_samples().
// A clip with no voiced frame yields an all-zero pitch spectrogram.
Features ExtractFeatures(const Waveform& w, const EncoderConfig& cfg);

template <typename T>
struct FeatureTensors {
  nn::ComplexTensor<T> cqt;  // [1, bins, frames]
  nn::Tensor<T> mel;         // [n_mels, frames]
  nn::Tensor<T> pitch;       // [scales, frames]
};

template <typename T>
FeatureTensors<T> ToTensors(const Features& f);

// Stack of complex conv -> complex ELU -> complex dropout blocks, then the
// real and imaginary maps are joined along channels and averaged over space.
template <typename T>
class SpecBlockEncoder {
 public:
  SpecBlockEncoder() = default;
  SpecBlockEncoder(nn::ParameterSet<T>& params, const std::string& name,
                   const SpecBlockConfig& cfg, std::mt19937_64& rng);

  // x [channels[0], F, T] -> [out_dim]. `trace` receives the output shape of
  // every block.
  nn::Tensor<T> Forward(const nn::ComplexTensor<T>& x,
                        const nn::ForwardContext& ctx,
                        std::vector<nn::Shape>* trace = nullptr) const;

 private:
  SpecBlockConfig cfg_;
  std::vector<nn::ComplexConvLayer<T>> blocks_;
};

template <typename T>
class VisionTransformer {
 public:
  VisionTransformer() = default;
  VisionTransformer(nn::ParameterSet<T>& params, const std::string& name,
                    const ViTConfig& cfg, std::size_t height, std::size_t width,
                    std::mt19937_64& rng);

  // x [height, width] -> [out_dim].
  nn::Tensor<T> Forward(const nn::Tensor<T>& x) const;

  std::size_t grid_rows() const { return grid_rows_; }
  std::size_t grid_cols() const { return grid_cols_; }
  std::size_t patches() const { return grid_rows_ * grid_cols_; }

 private:
  ViTConfig cfg_;
  std::size_t height_ = 0, width_ = 0, grid_rows_ = 0, grid_cols_ = 0;
  nn::LinearLayer<T> patch_proj_;
  nn::Tensor<T> class_token_, positions_;
  std::vector<nn::TransformerBlock<T>> layers_;
  nn::LayerNormLayer<T> final_norm_;
  nn::LinearLayer<T> head_;
};

// The three encoders plus the fusion layer.
template <typename T>
class SpeakerEncoder {
 public:
  SpeakerEncoder(const EncoderConfig& cfg, std::uint64_t seed);

  const EncoderConfig& config() const { return cfg_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  std::size_t ParameterCount() const { return params_.ScalarCount(); }

  // Concatenation of the three encoder outputs, [fused_dim].
  nn::Tensor<T> Fused(const FeatureTensors<T>& x,
                      const nn::ForwardContext& ctx) const;
  // [embedding_dim].
  nn::Tensor<T> Forward(const FeatureTensors<T>& x,
                        const nn::ForwardContext& ctx) const;
  // Eval mode, no graph.
  std::vector<double> Embed(const Features& f) const;
  std::vector<double> Embed(const Waveform& w) const;

  const SpecBlockEncoder<T>& cqt_encoder() const { return cqt_; }
  const VisionTransformer<T>& mel_encoder() const { return mel_; }
  const VisionTransformer<T>& pitch_encoder() const { return pitch_; }

  // JSON: config hash, fusion order, parameter count and the config text.
  std::string Manifest(const std::string& config_hash,
                       const std::string& config_text) const;

 private:
  EncoderConfig cfg_;
  nn::ParameterSet<T> params_;
  SpecBlockEncoder<T> cqt_;
  VisionTransformer<T> mel_;
  VisionTransformer<T> pitch_;
  nn::LinearLayer<T> fusion_;
};

extern template class SpecBlockEncoder<float>;
extern template class SpecBlockEncoder<double>;
extern template class VisionTransformer<float>;
extern template class VisionTransformer<double>;
extern template class SpeakerEncoder<float>;
extern template class SpeakerEncoder<double>;

}  // namespace vemb

#endif  // VEMB_ENCODERS_H_
