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

#include "vemb/train.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "vemb/encoders.h"
#include "vemb/error.h"
#include "vemb/hash.h"
#include "vemb/losses.h"
#include "vemb/nn/checkpoint.h"
#include "vemb/nn/ops.h"
#include "vemb/nn/optim.h"

namespace vemb {

namespace fs = std::filesystem;

void SpeakerCorpus::RequireTrainable() const {
  Check(!clips.empty(), ErrorCode::kDataError, "empty dataset");
  std::set<int> labels;
  for (const auto& c : clips) labels.insert(c.label);
  Check(labels.size() >= 2, ErrorCode::kDataError,
        "training needs at least 2 speakers");
}

SpeakerCorpus LoadSpeakerCorpus(const std::string& dir) {
  Check(fs::is_directory(dir), ErrorCode::kDataError, "not a directory: " + dir);
  std::vector<fs::path> speaker_dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) speaker_dirs.push_back(e.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  SpeakerCorpus corpus;
  for (const auto& sd : speaker_dirs) {
    std::vector<fs::path> wavs;
    for (const auto& e : fs::directory_iterator(sd)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
    }
    if (wavs.empty()) continue;
    std::sort(wavs.begin(), wavs.end());
    const std::string speaker = sd.filename().string();
    const int label = static_cast<int>(corpus.speakers.size());
    corpus.speakers.push_back(speaker);
    for (const auto& w : wavs) {
      corpus.clips.push_back({speaker + "/" + w.stem().string(), label, LoadWav(w.string())});
    }
  }
  return corpus;
}

void SaveSpeakerCorpus(const SpeakerCorpus& corpus, const std::string& dir) {
  for (const auto& c : corpus.clips) {
    const fs::path p = fs::path(dir) / (c.id + ".wav");
    fs::create_directories(p.parent_path());
    SaveWav(p.string(), c.wav, WavEncoding::kFloat32);
  }
}

SpeakerCorpus GenerateSpeakerCorpus(const SyntheticSpeakerConfig& cfg,
                                    std::uint64_t seed) {
  Check(cfg.speakers >= 1 && cfg.clips_per_speaker >= 1 && cfg.seconds > 0.0 &&
            cfg.sample_rate >= 8000,
        ErrorCode::kInvalidArgument, "bad synthetic corpus config");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  struct Recipe {
    double f0, tilt, vibrato_rate, vibrato_depth, breath;
    double formant[3], bandwidth[3];
  };
  // Pitch is stratified so no two voices share a range.
  std::vector<int> slot(cfg.speakers);
  std::iota(slot.begin(), slot.end(), 0);
  std::shuffle(slot.begin(), slot.end(), rng);
  std::vector<Recipe> recipes;
  for (int s = 0; s < cfg.speakers; ++s) {
    Recipe r;
    r.f0 = 90.0 * std::pow(240.0 / 90.0, (slot[s] + uniform(0.2, 0.8)) / cfg.speakers);
    r.tilt = uniform(0.7, 1.7);
    r.vibrato_rate = uniform(3.5, 7.0);
    r.vibrato_depth = uniform(0.005, 0.03);
    r.breath = uniform(0.005, 0.04);
    r.formant[0] = uniform(300.0, 850.0);
    r.formant[1] = uniform(950.0, 2300.0);
    r.formant[2] = uniform(2400.0, 3400.0);
    r.bandwidth[0] = uniform(60.0, 120.0);
    r.bandwidth[1] = uniform(80.0, 160.0);
    r.bandwidth[2] = uniform(120.0, 250.0);
    recipes.push_back(r);
  }

  const int sr = cfg.sample_rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.seconds * sr));
  const double nyquist_guard = std::min(6000.0, 0.45 * sr);
  SpeakerCorpus corpus;
  for (int s = 0; s < cfg.speakers; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "spk%02d", s);
    corpus.speakers.push_back(name);
    const Recipe& r = recipes[s];
    for (int c = 0; c < cfg.clips_per_speaker; ++c) {
      const double f0 = r.f0 * std::exp(0.10 * normal(rng));
      const double glide = uniform(-0.15, 0.15);
      const double shift = std::exp(0.05 * normal(rng));
      const double tilt = r.tilt + uniform(-0.15, 0.15);
      const double syllable_rate = uniform(2.5, 5.0);
      const double syllable_phase = uniform(0.0, 1.0);
      const double vib_phase = uniform(0.0, 2.0 * std::numbers::pi);
      const int harmonics = static_cast<int>(nyquist_guard / (f0 * 0.8));
      std::vector<double> phases(harmonics), amps(harmonics), rolloff(harmonics);
      for (int k = 0; k < harmonics; ++k) {
        phases[k] = uniform(0.0, 2.0 * std::numbers::pi);
        rolloff[k] = std::pow(k + 1.0, -tilt);
      }
      std::vector<double> x(n, 0.0);
      double phase = 0.0;
      constexpr std::size_t kBlock = 64;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double fi = f0 * (1.0 + glide * (t / cfg.seconds - 0.5)) *
                          (1.0 + r.vibrato_depth *
                                     std::sin(2.0 * std::numbers::pi * r.vibrato_rate * t + vib_phase));
        phase += 2.0 * std::numbers::pi * fi / sr;
        if (i % kBlock == 0) {
          for (int k = 0; k < harmonics; ++k) {
            const double fk = (k + 1) * fi;
            double env = 0.0;
            for (int m = 0; m < 3; ++m) {
              const double d = (fk - r.formant[m] * shift) / r.bandwidth[m];
              env += 1.0 / (1.0 + d * d);
            }
            amps[k] = fk < nyquist_guard ? rolloff[k] * (0.05 + env) : 0.0;
          }
        }
        double v = 0.0;
        for (int k = 0; k < harmonics; ++k) {
          if (amps[k] != 0.0) v += amps[k] * std::sin((k + 1) * phase + phases[k]);
        }
        const double syl = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                                (syllable_rate * t + syllable_phase));
        x[i] = (0.2 + 0.8 * syl) * v;
      }
      double peak = 0.0;
      for (double v : x) peak = std::max(peak, std::abs(v));
      for (double& v : x) v = 0.5 * v / peak + r.breath * normal(rng);
      char id[64];
      std::snprintf(id, sizeof(id), "%s/clip%03d", name, c);
      corpus.clips.push_back({id, s, Waveform{std::move(x), sr}});
    }
  }
  return corpus;
}

CorpusSplit SplitCorpus(const SpeakerCorpus& corpus, ValidationSplit by,
                        double val_fraction) {
  Check(val_fraction >= 0.0 && val_fraction < 1.0, ErrorCode::kInvalidArgument,
        "val_fraction must be in [0, 1)");
  CorpusSplit out;
  out.val.speakers = corpus.speakers;
  std::vector<int> remap(corpus.speakers.size(), -1);
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    const bool held = by == ValidationSplit::kSpeaker &&
                      HashUnit(corpus.speakers[s]) < val_fraction;
    if (!held) {
      remap[s] = static_cast<int>(out.train.speakers.size());
      out.train.speakers.push_back(corpus.speakers[s]);
    }
  }
  for (const auto& c : corpus.clips) {
    const bool held = by == ValidationSplit::kSpeaker
                          ? remap[c.label] < 0
                          : HashUnit(c.id) < val_fraction;
    if (held) {
      out.val.clips.push_back(c);
    } else {
      SpeakerClip t = c;
      t.label = remap[c.label];
      out.train.clips.push_back(std::move(t));
    }
  }
  return out;
}

TrialList MakeTrials(const SpeakerCorpus& corpus, std::size_t max_trials,
                     std::uint64_t seed) {
  const std::size_t n = corpus.clips.size();
  auto trial = [&](std::size_t i, std::size_t j) {
    return Trial{corpus.clips[i].id, corpus.clips[j].id,
                 corpus.clips[i].label == corpus.clips[j].label};
  };
  TrialList out;
  if (n < 2) return out;
  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs <= max_trials) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) out.push_back(trial(i, j));
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < max_trials) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    chosen.insert({std::min(i, j), std::max(i, j)});
  }
  for (const auto& [i, j] : chosen) out.push_back(trial(i, j));
  return out;
}

Waveform EvaluationSegment(const Waveform& w, const EncoderConfig& cfg) {
  ValidateWaveform(w);
  Waveform r = w.sample_rate == cfg.sample_rate ? w : Resample(w, cfg.sample_rate);
  const std::size_t len = cfg.segment_samples();
  Waveform out{std::vector<double>(len), cfg.sample_rate};
  const std::size_t n = r.samples.size();
  if (n >= len) {
    const std::size_t offset = (n - len) / 2;
    std::copy_n(r.samples.begin() + static_cast<std::ptrdiff_t>(offset), len,
                out.samples.begin());
  } else {
    for (std::size_t i = 0; i < len; ++i) out.samples[i] = r.samples[i % n];
  }
  return out;
}

struct EmbeddingModel::Impl {
  PipelineConfig cfg;
  std::string manifest;

  virtual ~Impl() = default;
  virtual std::vector<double> EmbedSegment(const Waveform& seg) const = 0;
  virtual void LoadFrom(const nn::Checkpoint& ckpt) = 0;
  virtual std::string BaseManifest() const = 0;
};

namespace {

template <typename T>
struct TypedImpl : EmbeddingModel::Impl {
  TypedImpl(const PipelineConfig& c, std::uint64_t seed) : encoder(c.encoder, seed) {
    cfg = c;
    manifest = BaseManifest();
  }

  std::vector<double> EmbedSegment(const Waveform& seg) const override {
    return encoder.Embed(ExtractFeatures(seg, cfg.encoder));
  }
  void LoadFrom(const nn::Checkpoint& ckpt) override {
    ckpt.LoadParameters(encoder.params());
  }
  std::string BaseManifest() const override {
    return encoder.Manifest(ConfigHash(cfg), ConfigToText(cfg));
  }

  SpeakerEncoder<T> encoder;
};

std::unique_ptr<EmbeddingModel::Impl> MakeImpl(const PipelineConfig& cfg,
                                               std::uint64_t seed) {
  if (cfg.precision == Precision::kFloat64) {
    return std::make_unique<TypedImpl<double>>(cfg, seed);
  }
  return std::make_unique<TypedImpl<float>>(cfg, seed);
}

}  // namespace

struct ModelAccess {
  static EmbeddingModel::Impl& impl(EmbeddingModel& m) { return *m.impl_; }
};

EmbeddingModel::EmbeddingModel() = default;
EmbeddingModel::~EmbeddingModel() = default;
EmbeddingModel::EmbeddingModel(EmbeddingModel&&) noexcept = default;
EmbeddingModel& EmbeddingModel::operator=(EmbeddingModel&&) noexcept = default;

EmbeddingModel::EmbeddingModel(const PipelineConfig& cfg, std::uint64_t seed)
    : impl_(MakeImpl(cfg, seed)) {}

EmbeddingModel EmbeddingModel::Load(const std::string& checkpoint_path) {
  nn::Checkpoint ckpt = nn::Checkpoint::Load(checkpoint_path);
  Check(ckpt.Has(nn::Checkpoint::kManifestKey), ErrorCode::kDataError,
        "checkpoint has no manifest");
  const std::string manifest = ckpt.GetText(nn::Checkpoint::kManifestKey);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(manifest);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kCorrupt, std::string("bad checkpoint manifest: ") + e.what());
  }
  Check(j.contains("config") && j["config"].is_string(), ErrorCode::kCorrupt,
        "checkpoint manifest has no config");
  PipelineConfig cfg = ParseConfig(j["config"].get<std::string>());
  EmbeddingModel m;
  m.impl_ = MakeImpl(cfg, 0);
  m.impl_->LoadFrom(ckpt);
  m.impl_->manifest = manifest;
  return m;
}

std::vector<double> EmbeddingModel::Embed(const Waveform& w) const {
  return impl_->EmbedSegment(EvaluationSegment(w, impl_->cfg.encoder));
}

EmbeddingStore EmbeddingModel::EmbedCorpus(const SpeakerCorpus& corpus) const {
  EmbeddingStore store;
  for (const auto& c : corpus.clips) store[c.id] = Embed(c.wav);
  return store;
}

const PipelineConfig& EmbeddingModel::config() const { return impl_->cfg; }
std::string EmbeddingModel::config_hash() const { return ConfigHash(impl_->cfg); }
const std::string& EmbeddingModel::manifest() const { return impl_->manifest; }
std::string EmbeddingModel::manifest_hash() const {
  return HashHex(Fnv1a64(impl_->manifest));
}

namespace {

template <typename T>
TrainResult Train(const PipelineConfig& cfg, const SpeakerCorpus& train,
                  const SpeakerCorpus& val, const TrainOptions& options) {
  train.RequireTrainable();
  const TrainConfig& tc = cfg.train;
  TrainResult result;
  result.config_hash = ConfigHash(cfg);
  result.model = EmbeddingModel(cfg, tc.seed);
  auto& impl = static_cast<TypedImpl<T>&>(ModelAccess::impl(result.model));
  SpeakerEncoder<T>& encoder = impl.encoder;

  std::mt19937_64 head_rng(tc.seed ^ 0x68656164ULL);
  nn::ParameterSet<T> head_params;
  MarginHead<T> head(head_params, "loss", cfg.encoder.embedding_dim,
                     train.speakers.size(), cfg.loss, head_rng);
  const nn::AdamConfig adam{tc.lr, tc.beta1, tc.beta2};
  nn::Adam<T> opt_encoder(encoder.params(), adam);
  nn::Adam<T> opt_head(head_params, adam);

  const EncoderConfig& ec = cfg.encoder;
  std::vector<Waveform> wavs;
  wavs.reserve(train.clips.size());
  for (const auto& c : train.clips) {
    ValidateWaveform(c.wav);
    wavs.push_back(c.wav.sample_rate == ec.sample_rate ? c.wav
                                                       : Resample(c.wav, ec.sample_rate));
  }
  // A clip of exactly one segment, or a fixed segment, never changes.
  std::vector<std::optional<Features>> cache(wavs.size());
  auto features = [&](std::size_t i, int epoch) -> Features {
    const bool fixed = !tc.redraw_segments || wavs[i].samples.size() == ec.segment_samples();
    if (fixed && cache[i]) return *cache[i];
    const std::uint64_t seg_seed =
        SegmentSeed(tc.seed, tc.redraw_segments ? static_cast<std::uint64_t>(epoch) : 0, i);
    Features f = ExtractFeatures(
        RandomSegment(wavs[i], SegmentSpec{ec.segment_seconds, ec.sample_rate, seg_seed}), ec);
    if (fixed) cache[i] = f;
    return f;
  };

  const std::size_t n = wavs.size();
  const std::size_t batch = static_cast<std::size_t>(tc.batch_size);
  const int steps_per_epoch = static_cast<int>((n + batch - 1) / batch);
  const int total_steps = tc.max_steps > 0 ? tc.max_steps : tc.epochs * steps_per_epoch;

  std::mt19937_64 order_rng(tc.seed ^ 0x6f72646572ULL);
  std::mt19937_64 dropout_rng(tc.seed ^ 0x64726f70ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::string> classes = train.speakers;
  auto save = [&](const std::string& path, int epoch) {
    nlohmann::json m = nlohmann::json::parse(impl.BaseManifest());
    m["epoch"] = epoch;
    m["loss"] = MarginKindName(cfg.loss.kind);
    m["classes"] = classes;
    impl.manifest = m.dump();
    nn::Checkpoint ckpt;
    ckpt.PutParameters(encoder.params());
    ckpt.PutParameters(head_params);
    ckpt.PutText(nn::Checkpoint::kManifestKey, impl.manifest);
    ckpt.Save(path);
  };
  if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

  double best_tpr = -1.0;
  int step = 0, epoch = 0;
  while (step < total_steps) {
    std::shuffle(order.begin(), order.end(), order_rng);
    EpochLog log;
    log.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t pos = 0; pos < n && step < total_steps; pos += batch, ++step) {
      const std::size_t end = std::min(n, pos + batch);
      encoder.params().ZeroGrad();
      head_params.ZeroGrad();
      std::vector<nn::Tensor<T>> rows;
      std::vector<int> labels;
      const nn::ForwardContext ctx{true, &dropout_rng};
      for (std::size_t k = pos; k < end; ++k) {
        const std::size_t i = order[k];
        nn::Tensor<T> e = encoder.Forward(ToTensors<T>(features(i, epoch)), ctx);
        rows.push_back(nn::Reshape(e, {1, ec.embedding_dim}));
        labels.push_back(train.clips[i].label);
      }
      nn::Tensor<T> loss = head.Loss(nn::Concat(rows, 0), labels);
      const double value = loss.item();
      Check(std::isfinite(value), ErrorCode::kNumeric,
            "loss is not finite at step " + std::to_string(step));
      loss.Backward();
      opt_encoder.Step();
      opt_head.Step();
      result.step_loss.push_back(value);
      loss_sum += value;
      ++log.steps;
      if (options.on_step) options.on_step({step, epoch, value});
    }
    log.mean_loss = loss_sum / std::max(1, log.steps);
    const TrialList trials =
        MakeTrials(val, static_cast<std::size_t>(tc.max_val_trials), tc.seed);
    if (!trials.empty()) {
      const ScoreSet s = ScoreTrials(result.model.EmbedCorpus(val), trials);
      if (!s.positive.empty() && !s.negative.empty()) {
        log.validated = true;
        log.val_tpr_at_001 = TprAtFpr(s, 0.01);
        log.val_tpr_at_01 = TprAtFpr(s, 0.1);
        log.val_eer = Eer(s);
        if (log.val_tpr_at_001 > best_tpr) {
          best_tpr = log.val_tpr_at_001;
          log.best = true;
          result.best_epoch = epoch;
        }
      }
    }
    if (!options.out_dir.empty()) {
      const std::string path =
          (fs::path(options.out_dir) / ("epoch_" + std::to_string(epoch) + ".ckpt")).string();
      save(path, epoch);
      result.last_checkpoint = path;
      if (log.best) {
        result.best_checkpoint = (fs::path(options.out_dir) / "best.ckpt").string();
        save(result.best_checkpoint, epoch);
      }
    }
    result.epochs.push_back(log);
    if (options.on_epoch) options.on_epoch(log);
    ++epoch;
  }
  return result;
}

}  // namespace

TrainResult TrainSpeakerModel(const PipelineConfig& cfg, const SpeakerCorpus& train,
                              const SpeakerCorpus& val, const TrainOptions& options) {
  PipelineConfig c = cfg;
  c.Finalize();
  return c.precision == Precision::kFloat64 ? Train<double>(c, train, val, options)
                                            : Train<float>(c, train, val, options);
}

}  // namespace vemb
