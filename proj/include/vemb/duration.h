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

#ifndef VEMB_DURATION_H_
#define VEMB_DURATION_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vemb/metrics.h"
#include "vemb/nn/layers.h"
#include "vemb/nn/tensor.h"

namespace vemb {

// ARPAbet with vowel stress plus the aligner's silence labels.
const std::vector<std::string>& PhonemeVocabulary();
// kParse for symbols outside the vocabulary.
int PhonemeId(const std::string& symbol);

struct PhonemeSequence {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<int> symbols;

  void Validate() const;
};

struct AlignedPhoneme {
  std::string symbol;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct Alignment {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<AlignedPhoneme> phonemes;

  PhonemeSequence Sequence() const;
};

constexpr double kMaxAlignmentGap = 0.020;

// TSV with header "utt\tspeaker\tphoneme\tstart_s\tend_s". Rows of one
// utterance are consecutive and sorted by time. kParse on malformed rows,
// overlaps, gaps above kMaxAlignmentGap and unknown phonemes.
std::vector<Alignment> ReadAlignments(std::istream& is);
std::vector<Alignment> LoadAlignments(const std::string& path);
void WriteAlignments(std::ostream& os, const std::vector<Alignment>& a);
void SaveAlignments(const std::string& path, const std::vector<Alignment>& a);

constexpr int kDurationHop = 256;

std::int64_t DurationFrames(double start_s, double end_s, int sample_rate,
                            int hop = kDurationHop);
std::vector<int> AlignmentFrames(const Alignment& a, int sample_rate,
                                 int hop = kDurationHop);

enum class ConditioningMode { kNone, kNoise, kSpeakerEmb, kUtteranceEmb };

constexpr ConditioningMode kAllConditioningModes[] = {
    ConditioningMode::kNone, ConditioningMode::kNoise,
    ConditioningMode::kSpeakerEmb, ConditioningMode::kUtteranceEmb};

// "NONE", "NOISE", "SPEAKER_EMB", "UTTERANCE_EMB" (case-insensitive parse).
const char* ConditioningModeName(ConditioningMode mode);
ConditioningMode ParseConditioningMode(const std::string& name);

struct DurationPredictorConfig {
  std::size_t vocab_size = 0;  // 0: PhonemeVocabulary().size()
  std::size_t model_dim = 128;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ffn_dim = 256;
  std::size_t cond_dim = 2048;
  double initial_frames = 6.0;  // output before training

  std::size_t vocabulary() const;
  void Validate() const;
};

template <typename T>
class DurationPredictor {
 public:
  DurationPredictor() = default;
  DurationPredictor(const DurationPredictorConfig& cfg, std::uint64_t seed);

  // Per-phoneme durations in frames, strictly positive. `cond` is ignored
  // in kNone mode and required otherwise; its length must be cond_dim.
  nn::Tensor<T> Forward(std::span<const int> symbols, ConditioningMode mode,
                        const std::vector<double>* cond) const;
  std::vector<double> Predict(std::span<const int> symbols,
                              ConditioningMode mode,
                              const std::vector<double>* cond) const;

  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }
  const DurationPredictorConfig& config() const { return cfg_; }

 private:
  DurationPredictorConfig cfg_;
  nn::ParameterSet<T> params_;
  nn::Tensor<T> embedding_;
  nn::LinearLayer<T> cond_proj_;
  std::vector<nn::TransformerBlock<T>> layers_;
  nn::LayerNormLayer<T> norm_;
  nn::LinearLayer<T> head_;
};

// mean |log(1 + pred) - log(1 + frames)|
template <typename T>
nn::Tensor<T> LogDurationL1(const nn::Tensor<T>& pred, std::span<const int> frames);

struct DurationExample {
  PhonemeSequence sequence;
  std::vector<int> frames;
};

struct DurationDataset {
  std::vector<DurationExample> train;
  std::vector<DurationExample> test;
  EmbeddingStore embeddings;  // by utterance id
  std::size_t embedding_dim = 0;
  // Sorted utterance ids per speaker, over both splits.
  std::map<std::string, std::vector<std::string>> speaker_utterances;
};

// Test membership is decided by a hash of the utterance id.
DurationDataset BuildDurationDataset(const std::vector<Alignment>& alignments,
                                     EmbeddingStore embeddings,
                                     double test_fraction, int sample_rate,
                                     int hop = kDurationHop);

struct TempoCorpusConfig {
  int speakers = 16;
  int utterances_per_speaker = 30;
  int min_phonemes = 8;
  int max_phonemes = 24;
  int active_phonemes = 40;  // drawn from the front of the vocabulary
  double min_base_frames = 2.0;
  double max_base_frames = 14.0;
  double min_tempo = 0.6;
  double max_tempo = 1.6;
  double utterance_rate_sd = 0.15;
  double jitter_sd = 0.08;
  std::size_t embedding_dim = 2048;
  double embedding_tempo_weight = 0.5;
  double embedding_noise = 0.3;
  int sample_rate = 24000;
};

struct TempoCorpus {
  std::vector<Alignment> alignments;
  EmbeddingStore embeddings;
};

// Speakers differ by a tempo multiplier; each utterance adds its own rate.
// Embeddings mix a speaker code with a direction scaled by the log tempo.
TempoCorpus GenerateTempoCorpus(const TempoCorpusConfig& cfg,
                                std::uint64_t seed);

struct DurationTrainConfig {
  DurationPredictorConfig model;
  int epochs = 20;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

struct DurationMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double wder = 0.0;
  double ccc = 0.0;
};

struct DurationArmResult {
  ConditioningMode mode = ConditioningMode::kNone;
  DurationMetrics metrics;
  std::vector<double> epoch_loss;
};

// Conditioning vector for one example, or nullopt in kNone mode. kNoise draws
// from `rng`; kSpeakerEmb uses another utterance of the same speaker when
// one exists.
std::optional<std::vector<double>> ConditioningVector(
    const DurationDataset& data, const PhonemeSequence& seq,
    ConditioningMode mode, std::mt19937_64& rng);

// Every arm starts from the same initial weights and sees the same order.
std::vector<DurationArmResult> RunConditioningExperiment(
    const DurationDataset& data, std::span<const ConditioningMode> modes,
    const DurationTrainConfig& cfg);

// Per mode, the median of each metric over runs with different seeds.
std::vector<DurationArmResult> MedianOverSeeds(
    const std::vector<std::vector<DurationArmResult>>& runs);

// JSON keyed by mode with MAE/RMSE/WDER/CCC, plus the reference table.
std::string DurationReport(const std::vector<DurationArmResult>& results,
                           const std::string& extra_json = "{}");

extern template class DurationPredictor<float>;
extern template class DurationPredictor<double>;

}  // namespace vemb

#endif  // VEMB_DURATION_H_
