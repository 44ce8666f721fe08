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

#ifndef VEMB_TRAIN_H_
#define VEMB_TRAIN_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vemb/audio.h"
#include "vemb/config.h"
#include "vemb/metrics.h"

namespace vemb {

struct SpeakerClip {
  std::string id;  // "<speaker>/<file stem>"
  int label = 0;   // index into SpeakerCorpus::speakers
  Waveform wav;
};

struct SpeakerCorpus {
  std::vector<std::string> speakers;
  std::vector<SpeakerClip> clips;

  // kDataError when empty or with fewer than two speakers.
  void RequireTrainable() const;
};

// <dir>/<speaker>/<clip>.wav, sorted by name.
SpeakerCorpus LoadSpeakerCorpus(const std::string& dir);
void SaveSpeakerCorpus(const SpeakerCorpus& corpus, const std::string& dir);

struct SyntheticSpeakerConfig {
  int speakers = 8;
  int clips_per_speaker = 50;
  double seconds = 2.0;
  int sample_rate = 24000;
};

// Harmonic voices; every speaker has its own pitch range, formant set,
// spectral tilt, vibrato and breathiness.
SpeakerCorpus GenerateSpeakerCorpus(const SyntheticSpeakerConfig& cfg,
                                    std::uint64_t seed);

struct CorpusSplit {
  SpeakerCorpus train;
  SpeakerCorpus val;
};

// Membership decided by a hash of the speaker or clip id. Train labels are
// renumbered over the speakers it keeps.
CorpusSplit SplitCorpus(const SpeakerCorpus& corpus, ValidationSplit by,
                        double val_fraction);

// All clip pairs, or an evenly seeded sample of at most max_trials.
TrialList MakeTrials(const SpeakerCorpus& corpus, std::size_t max_trials,
                     std::uint64_t seed);

// Resampled to the model rate, then a centred crop (or a tiled copy when
// shorter) of one segment.
Waveform EvaluationSegment(const Waveform& w, const EncoderConfig& cfg);

class EmbeddingModel {
 public:
  EmbeddingModel();
  ~EmbeddingModel();
  EmbeddingModel(EmbeddingModel&&) noexcept;
  EmbeddingModel& operator=(EmbeddingModel&&) noexcept;

  // Fresh weights.
  EmbeddingModel(const PipelineConfig& cfg, std::uint64_t seed);
  static EmbeddingModel Load(const std::string& checkpoint_path);

  std::vector<double> Embed(const Waveform& w) const;
  EmbeddingStore EmbedCorpus(const SpeakerCorpus& corpus) const;

  const PipelineConfig& config() const;
  std::string config_hash() const;
  // Manifest JSON text and its hash.
  const std::string& manifest() const;
  std::string manifest_hash() const;

  struct Impl;  // opaque

 private:
  friend struct ModelAccess;
  std::unique_ptr<Impl> impl_;
};

struct EpochLog {
  int epoch = 0;
  int steps = 0;
  double mean_loss = 0.0;
  bool validated = false;
  double val_tpr_at_001 = 0.0;
  double val_tpr_at_01 = 0.0;
  double val_eer = 0.0;
  bool best = false;
};

struct StepLog {
  int step = 0;
  int epoch = 0;
  double loss = 0.0;
};

struct TrainOptions {
  // Writes epoch_<n>.ckpt and best.ckpt here when non-empty.
  std::string out_dir;
  std::function<void(const StepLog&)> on_step;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  EmbeddingModel model;  // weights after the last step
  std::vector<double> step_loss;
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  std::string config_hash;
  std::string last_checkpoint;
  std::string best_checkpoint;
};

// `val` may be empty, in which case no best checkpoint is chosen. kNumeric
// when a loss or gradient stops being finite.
TrainResult TrainSpeakerModel(const PipelineConfig& cfg,
                              const SpeakerCorpus& train,
                              const SpeakerCorpus& val,
                              const TrainOptions& options = {});

}  // namespace vemb

#endif  // VEMB_TRAIN_H_
