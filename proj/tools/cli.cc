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

#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vemb/audio.h"
#include "vemb/config.h"
#include "vemb/duration.h"
#include "vemb/embedding_io.h"
#include "vemb/ensemble.h"
#include "vemb/error.h"
#include "vemb/hash.h"
#include "vemb/metrics.h"
#include "vemb/train.h"

namespace vemb::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PipelineConfig ResolveConfig(const std::string& path, bool desk) {
  if (!path.empty()) return LoadConfig(path);
  PipelineConfig c = desk ? DeskConfig() : PipelineConfig{};
  c.Finalize();
  return c;
}

void WriteText(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kUnreadableFile, "cannot write " + path);
  os << text << '\n';
}

std::string FileHash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kUnreadableFile, "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return HashHex(Fnv1a64(ss.str()));
}

ScoreSet SplitScores(const TrialList& trials, std::span<const double> scores) {
  Check(trials.size() == scores.size(), ErrorCode::kShapeMismatch,
        "score count " + std::to_string(scores.size()) + " does not match " +
            std::to_string(trials.size()) + " trials");
  ScoreSet s;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    (trials[i].is_target ? s.positive : s.negative).push_back(scores[i]);
  }
  return s;
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out;
  bool desk = false, deterministic = false;
  int steps = -1, epochs = -1;
  long long seed = -1;
};

int Train(const TrainArgs& a, std::ostream& out) {
  PipelineConfig cfg = ResolveConfig(a.config, a.desk);
  if (a.steps >= 0) cfg.train.max_steps = a.steps;
  if (a.epochs > 0) cfg.train.epochs = a.epochs;
  if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
  if (a.deterministic) cfg.train.deterministic = true;
  cfg.Finalize();

  SpeakerCorpus corpus = LoadSpeakerCorpus(a.data);
  corpus.RequireTrainable();
  CorpusSplit split = SplitCorpus(corpus, cfg.train.val_split, cfg.train.val_fraction);
  split.train.RequireTrainable();
  out << "config " << ConfigHash(cfg) << "  train clips " << split.train.clips.size()
      << "  val clips " << split.val.clips.size() << "  speakers "
      << split.train.speakers.size() << '\n';

  TrainOptions opts;
  opts.out_dir = a.out;
  opts.on_step = [&](const StepLog& s) {
    out << "step " << s.step << "\tepoch " << s.epoch << "\tloss "
        << std::setprecision(9) << s.loss << '\n';
  };
  opts.on_epoch = [&](const EpochLog& e) {
    out << "epoch " << e.epoch << "\tmean_loss " << e.mean_loss;
    if (e.validated) {
      out << "\tval_tpr@0.01 " << e.val_tpr_at_001 << "\tval_tpr@0.1 "
          << e.val_tpr_at_01 << "\tval_eer " << e.val_eer << (e.best ? "\tbest" : "");
    }
    out << '\n';
  };
  TrainResult r = TrainSpeakerModel(cfg, split.train, split.val, opts);
  const fs::path final_path = fs::path(a.out) / "final.ckpt";
  fs::copy_file(r.last_checkpoint, final_path, fs::copy_options::overwrite_existing);

  Json j;
  j["config_hash"] = r.config_hash;
  j["manifest_hash"] = r.model.manifest_hash();
  j["steps"] = r.step_loss.size();
  j["step_loss"] = r.step_loss;
  Json epochs = Json::array();
  for (const auto& e : r.epochs) {
    Json row{{"epoch", e.epoch}, {"steps", e.steps}, {"mean_loss", e.mean_loss}};
    if (e.validated) {
      row["val_tpr_at_fpr_0.01"] = e.val_tpr_at_001;
      row["val_tpr_at_fpr_0.1"] = e.val_tpr_at_01;
      row["val_eer"] = e.val_eer;
    }
    epochs.push_back(row);
  }
  j["epochs"] = epochs;
  j["best_epoch"] = r.best_epoch;
  j["best_checkpoint"] = r.best_checkpoint;
  j["final_checkpoint"] = final_path.string();
  j["train_clips"] = split.train.clips.size();
  j["val_clips"] = split.val.clips.size();
  WriteText((fs::path(a.out) / "train_report.json").string(), j.dump(2), out);
  return kOk;
}

// --- embed / verify ------------------------------------------------------

struct EmbedArgs {
  std::string checkpoint, out;
  std::vector<std::string> wavs;
};

int Embed(const EmbedArgs& a, std::ostream& out) {
  EmbeddingModel model = EmbeddingModel::Load(a.checkpoint);
  std::vector<EmbeddingRecord> records;
  for (const auto& path : a.wavs) {
    auto e = model.Embed(LoadWav(path));
    records.push_back({path, std::vector<float>(e.begin(), e.end())});
  }
  SaveEmbeddings(a.out, records);
  out << "wrote " << records.size() << " embeddings of dim "
      << model.config().encoder.embedding_dim << " to " << a.out << '\n';
  return kOk;
}

struct VerifyArgs {
  std::string checkpoint, wav_a, wav_b;
};

int Verify(const VerifyArgs& a, std::ostream& out) {
  EmbeddingModel model = EmbeddingModel::Load(a.checkpoint);
  const double score =
      CosineSimilarity(model.Embed(LoadWav(a.wav_a)), model.Embed(LoadWav(a.wav_b)));
  out << std::setprecision(17) << score << '\n';
  return kOk;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, trials, audio_root, embeddings, out;
  std::vector<double> fpr = {kReferenceFprLevels.begin(), kReferenceFprLevels.end()};
};

int Eval(const EvalArgs& a, std::ostream& out) {
  if (a.audio_root.empty() == a.embeddings.empty()) {
    throw UsageError("eval needs exactly one of --audio-root or --embeddings");
  }
  for (double f : a.fpr) {
    if (!(f > 0.0 && f <= 1.0)) throw UsageError("FPR levels must be in (0, 1]");
  }
  EmbeddingModel model = EmbeddingModel::Load(a.checkpoint);
  const TrialList trials = ReadTrialList(a.trials);
  Check(!trials.empty(), ErrorCode::kDataError, "empty trial list");
  EmbeddingStore store;
  if (!a.embeddings.empty()) {
    store = ToEmbeddingStore(LoadEmbeddings(a.embeddings));
  } else {
    std::set<std::string> ids;
    for (const auto& t : trials) {
      ids.insert(t.id_a);
      ids.insert(t.id_b);
    }
    for (const auto& id : ids) {
      fs::path p = fs::path(a.audio_root) / id;
      if (p.extension() != ".wav") p += ".wav";
      store[id] = model.Embed(LoadWav(p.string()));
    }
  }
  const ScoreSet s = ScoreTrials(store, trials);
  Json extra;
  extra["config_hash"] = model.config_hash();
  extra["manifest_hash"] = model.manifest_hash();
  extra["published_tpr_at_fpr"] = {
      {"0.5", 0.9869}, {"0.2", 0.9469}, {"0.1", 0.9044}, {"0.05", 0.8354}, {"0.01", 0.5920}};
  WriteText(a.out, MetricsReport(s, a.fpr, extra.dump()), out);
  return kOk;
}

// --- duration ------------------------------------------------------------

struct DurationArgs {
  std::string config, alignments, embeddings, mode = "all", out;
  int seeds = -1;
};

int Duration(const DurationArgs& a, std::ostream& out) {
  PipelineConfig cfg = ResolveConfig(a.config, false);
  if (a.seeds > 0) cfg.duration.seeds = a.seeds;
  cfg.Finalize();
  std::vector<ConditioningMode> modes;
  if (a.mode == "all") {
    modes.assign(std::begin(kAllConditioningModes), std::end(kAllConditioningModes));
  } else {
    try {
      modes.push_back(ParseConditioningMode(a.mode));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const auto alignments = LoadAlignments(a.alignments);
  EmbeddingStore store;
  if (!a.embeddings.empty()) store = ToEmbeddingStore(LoadEmbeddings(a.embeddings));
  const DurationDataset data =
      BuildDurationDataset(alignments, std::move(store), cfg.duration.test_fraction,
                           cfg.duration.sample_rate, cfg.duration.hop);

  std::vector<std::vector<DurationArmResult>> runs;
  Json per_seed = Json::array();
  for (int k = 0; k < cfg.duration.seeds; ++k) {
    DurationTrainConfig tc;
    tc.model = cfg.duration.model;
    tc.epochs = cfg.duration.epochs;
    tc.batch_size = cfg.duration.batch_size;
    tc.lr = cfg.duration.lr;
    tc.seed = cfg.duration.seed + static_cast<std::uint64_t>(k);
    runs.push_back(RunConditioningExperiment(data, modes, tc));
    Json one = Json::parse(DurationReport(runs.back()));
    per_seed.push_back(Json{{"seed", tc.seed}, {"results", one["results"]}});
    for (const auto& r : runs.back()) {
      out << "seed " << tc.seed << '\t' << ConditioningModeName(r.mode) << "\tMAE "
          << r.metrics.mae << "\tRMSE " << r.metrics.rmse << "\tWDER " << r.metrics.wder
          << "\tCCC " << r.metrics.ccc << '\n';
    }
  }
  Json extra;
  extra["config_hash"] = ConfigHash(cfg);
  extra["alignments_hash"] = FileHash(a.alignments);
  if (!a.embeddings.empty()) extra["embeddings_hash"] = FileHash(a.embeddings);
  extra["aggregate"] = cfg.duration.seeds > 1 ? "median over seeds" : "single seed";
  extra["train_utterances"] = data.train.size();
  extra["test_utterances"] = data.test.size();
  extra["per_seed"] = per_seed;
  WriteText(a.out, DurationReport(MedianOverSeeds(runs), extra.dump()), out);
  return kOk;
}

// --- fuse ----------------------------------------------------------------

struct FuseArgs {
  std::string config, scores1, scores2, trials, preset = "all", out, out_scores;
};

int Fuse(const FuseArgs& a, std::ostream& out) {
  PipelineConfig cfg = ResolveConfig(a.config, false);
  std::vector<FusionConfig> presets;
  if (a.preset == "all") {
    presets = FusionPresets();
    if (!a.out_scores.empty()) throw UsageError("--out-scores needs a single --preset");
  } else {
    try {
      presets.push_back(FusionPreset(a.preset));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const TrialList trials = ReadTrialList(a.trials);
  const auto x1 = ReadScoreFile(a.scores1);
  const auto x2 = ReadScoreFile(a.scores2);
  Check(x1.size() == x2.size(), ErrorCode::kShapeMismatch,
        "score files differ in length: " + std::to_string(x1.size()) + " vs " +
            std::to_string(x2.size()));
  const ScoreSet s1 = SplitScores(trials, x1), s2 = SplitScores(trials, x2);
  const auto results = EvaluateFusion(trials, x1, x2, presets);
  if (!a.out_scores.empty()) WriteScoreFile(a.out_scores, FuseScores(x1, x2, presets[0]));
  Json extra;
  extra["config_hash"] = ConfigHash(cfg);
  extra["scores1_hash"] = FileHash(a.scores1);
  extra["scores2_hash"] = FileHash(a.scores2);
  WriteText(a.out, FusionReport(results, Eer(s1), Eer(s2), extra.dump()), out);
  return kOk;
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string kind = "speakers", out;
  int speakers = 8, clips = 50, utterances = 25, embedding_dim = 2048;
  double seconds = 2.0;
  long long seed = 1;
  int max_trials = 20000;
};

int Synth(const SynthArgs& a, std::ostream& out) {
  if (a.speakers < 1 || a.clips < 1 || a.utterances < 1 || a.embedding_dim < 1 ||
      a.seconds <= 0.0 || a.max_trials < 1) {
    throw UsageError("synth sizes must be positive");
  }
  fs::create_directories(a.out);
  const auto seed = static_cast<std::uint64_t>(a.seed);
  if (a.kind == "speakers") {
    SyntheticSpeakerConfig sc;
    sc.speakers = a.speakers;
    sc.clips_per_speaker = a.clips;
    sc.seconds = a.seconds;
    const SpeakerCorpus c = GenerateSpeakerCorpus(sc, seed);
    SaveSpeakerCorpus(c, a.out);
    const TrialList trials = MakeTrials(c, static_cast<std::size_t>(a.max_trials), seed);
    WriteTrialList((fs::path(a.out) / "trials.tsv").string(), trials);
    out << "wrote " << c.clips.size() << " clips and " << trials.size() << " trials to "
        << a.out << '\n';
  } else if (a.kind == "tempo") {
    TempoCorpusConfig tc;
    tc.speakers = a.speakers;
    tc.utterances_per_speaker = a.utterances;
    tc.embedding_dim = static_cast<std::size_t>(a.embedding_dim);
    const TempoCorpus c = GenerateTempoCorpus(tc, seed);
    SaveAlignments((fs::path(a.out) / "alignments.tsv").string(), c.alignments);
    std::vector<EmbeddingRecord> records;
    for (const auto& [id, v] : c.embeddings) {
      records.push_back({id, std::vector<float>(v.begin(), v.end())});
    }
    SaveEmbeddings((fs::path(a.out) / "embeddings.vec").string(), records);
    out << "wrote " << c.alignments.size() << " utterances to " << a.out << '\n';
  } else {
    throw UsageError("--kind must be speakers or tempo");
  }
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speaker embeddings: training, scoring, duration experiments, fusion"};
  app.name("vemb");
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the speaker encoder on <speaker>/<clip>.wav");
  train->add_option("--config", ta.config, "Pipeline config file");
  train->add_flag("--desk", ta.desk, "Use the small single-core config when --config is absent");
  train->add_option("--data", ta.data, "Corpus directory")->required();
  train->add_option("--out", ta.out, "Output directory for checkpoints and report")->required();
  train->add_option("--steps", ta.steps, "Override train.max_steps");
  train->add_option("--epochs", ta.epochs, "Override train.epochs");
  train->add_option("--seed", ta.seed, "Override train.seed");
  train->add_flag("--deterministic", ta.deterministic, "Single-threaded, reproducible run");

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Write one embedding per WAV");
  embed->add_option("--checkpoint", ea.checkpoint)->required();
  embed->add_option("--out", ea.out, "VEC1 output file")->required();
  embed->add_option("wavs", ea.wavs, "Input WAV files")->required();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Print the cosine score of two WAVs");
  verify->add_option("--checkpoint", va.checkpoint)->required();
  verify->add_option("wav_a", va.wav_a)->required();
  verify->add_option("wav_b", va.wav_b)->required();

  EvalArgs eva;
  auto* eval = app.add_subcommand("eval", "TPR@FPR and EER over a trial list");
  eval->add_option("--checkpoint", eva.checkpoint)->required();
  eval->add_option("--trials", eva.trials, "id_a<TAB>id_b<TAB>0|1")->required();
  eval->add_option("--audio-root", eva.audio_root, "Directory holding <id>.wav");
  eval->add_option("--embeddings", eva.embeddings, "Precomputed VEC1 embeddings");
  eval->add_option("--fpr", eva.fpr, "FPR levels")->delimiter(',');
  eval->add_option("--out", eva.out, "Report path (stdout when absent)");

  DurationArgs da;
  auto* duration = app.add_subcommand("duration", "Duration predictor conditioning experiment");
  duration->add_option("--config", da.config);
  duration->add_option("--alignments", da.alignments)->required();
  duration->add_option("--embeddings", da.embeddings, "VEC1 embeddings keyed by utterance");
  duration->add_option("--mode", da.mode, "all, NONE, NOISE, SPEAKER_EMB or UTTERANCE_EMB");
  duration->add_option("--seeds", da.seeds, "Override duration.seeds");
  duration->add_option("--out", da.out);

  FuseArgs fa;
  auto* fuse = app.add_subcommand("fuse", "Score-level fusion of two systems");
  fuse->add_option("--config", fa.config);
  fuse->add_option("--scores1", fa.scores1, "idx<TAB>score for this system")->required();
  fuse->add_option("--scores2", fa.scores2, "idx<TAB>score for the other system")->required();
  fuse->add_option("--trials", fa.trials)->required();
  fuse->add_option("--preset", fa.preset, "y1, y2, y3 or all");
  fuse->add_option("--out", fa.out);
  fuse->add_option("--out-scores", fa.out_scores, "Fused scores for one preset");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate synthetic corpora");
  synth->add_option("--kind", sa.kind, "speakers or tempo");
  synth->add_option("--out", sa.out)->required();
  synth->add_option("--speakers", sa.speakers);
  synth->add_option("--clips", sa.clips, "Clips per speaker");
  synth->add_option("--utterances", sa.utterances, "Utterances per speaker (tempo)");
  synth->add_option("--embedding-dim", sa.embedding_dim);
  synth->add_option("--seconds", sa.seconds);
  synth->add_option("--seed", sa.seed);
  synth->add_option("--max-trials", sa.max_trials);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train->parsed()) return Train(ta, out);
    if (embed->parsed()) return Embed(ea, out);
    if (verify->parsed()) return Verify(va, out);
    if (eval->parsed()) return Eval(eva, out);
    if (duration->parsed()) return Duration(da, out);
    if (fuse->parsed()) return Fuse(fa, out);
    if (synth->parsed()) return Synth(sa, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::kNumeric ? kNumericFailure : kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace vemb::cli
