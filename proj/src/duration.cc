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

#include "vemb/duration.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vemb/error.h"
#include "vemb/hash.h"
#include "vemb/nn/ops.h"
#include "vemb/nn/optim.h"

namespace vemb {

namespace {

using nn::Tensor;

const char kAlignmentHeader[] = "utt\tspeaker\tphoneme\tstart_s\tend_s";

std::vector<std::string> BuildVocabulary() {
  static const char* vowels[] = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                                 "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
  static const char* consonants[] = {"B",  "CH", "D", "DH", "F", "G",
                                     "HH", "JH", "K", "L",  "M", "N",
                                     "NG", "P",  "R", "S",  "SH", "T",
                                     "TH", "V",  "W", "Y",  "Z", "ZH"};
  std::vector<std::string> v;
  for (const char* p : vowels) {
    for (char stress : {'0', '1', '2'}) v.push_back(std::string(p) + stress);
  }
  for (const char* p : consonants) v.emplace_back(p);
  for (const char* p : {"sil", "sp", "spn"}) v.emplace_back(p);
  return v;
}

double ParseSeconds(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v) || v < 0.0) {
    Fail(ErrorCode::kParse, "alignment line " + std::to_string(line) +
                                ": bad time '" + field + "'");
  }
  return v;
}

std::string FormatSeconds(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<double> Positions(std::size_t n, std::size_t d) {
  std::vector<double> p(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; k += 2) {
      double angle = static_cast<double>(i) /
                     std::pow(10000.0, static_cast<double>(k) / static_cast<double>(d));
      p[i * d + k] = std::sin(angle);
      if (k + 1 < d) p[i * d + k + 1] = std::cos(angle);
    }
  }
  return p;
}

}  // namespace

const std::vector<std::string>& PhonemeVocabulary() {
  static const std::vector<std::string> vocab = BuildVocabulary();
  return vocab;
}

int PhonemeId(const std::string& symbol) {
  static const std::map<std::string, int> index = [] {
    std::map<std::string, int> m;
    const auto& v = PhonemeVocabulary();
    for (std::size_t i = 0; i < v.size(); ++i) m[v[i]] = static_cast<int>(i);
    return m;
  }();
  auto it = index.find(symbol);
  if (it == index.end()) Fail(ErrorCode::kParse, "unknown phoneme '" + symbol + "'");
  return it->second;
}

void PhonemeSequence::Validate() const {
  Check(!symbols.empty(), ErrorCode::kInvalidArgument,
        "empty phoneme sequence for " + utterance_id);
  const int v = static_cast<int>(PhonemeVocabulary().size());
  for (int s : symbols) {
    Check(s >= 0 && s < v, ErrorCode::kInvalidArgument,
          "phoneme id out of range in " + utterance_id);
  }
}

PhonemeSequence Alignment::Sequence() const {
  PhonemeSequence s{utterance_id, speaker_id, {}};
  for (const auto& p : phonemes) s.symbols.push_back(PhonemeId(p.symbol));
  s.Validate();
  return s;
}

std::vector<Alignment> ReadAlignments(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) Fail(ErrorCode::kParse, "empty alignment file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Check(line == kAlignmentHeader, ErrorCode::kParse,
        "alignment header must be '" + std::string(kAlignmentHeader) + "'");

  std::vector<Alignment> out;
  std::set<std::string> finished;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    const std::string where = "alignment line " + std::to_string(lineno);
    Check(f.size() == 5, ErrorCode::kParse, where + ": expected 5 fields");
    Check(!f[0].empty() && !f[1].empty(), ErrorCode::kParse,
          where + ": empty utterance or speaker");
    PhonemeId(f[2]);
    AlignedPhoneme p{f[2], ParseSeconds(f[3], lineno), ParseSeconds(f[4], lineno)};
    Check(p.end_s >= p.start_s, ErrorCode::kParse, where + ": end before start");

    if (out.empty() || out.back().utterance_id != f[0]) {
      Check(finished.insert(f[0]).second, ErrorCode::kParse,
            where + ": rows of " + f[0] + " are not consecutive");
      out.push_back({f[0], f[1], {}});
    } else {
      const Alignment& a = out.back();
      Check(a.speaker_id == f[1], ErrorCode::kParse,
            where + ": speaker changes within " + f[0]);
      const double prev_end = a.phonemes.back().end_s;
      Check(p.start_s >= prev_end, ErrorCode::kParse,
            where + ": overlaps the previous interval");
      Check(p.start_s - prev_end <= kMaxAlignmentGap + 1e-9, ErrorCode::kParse,
            where + ": gap of more than 20 ms");
    }
    out.back().phonemes.push_back(std::move(p));
  }
  return out;
}

std::vector<Alignment> LoadAlignments(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kUnreadableFile, "cannot open " + path);
  return ReadAlignments(is);
}

void WriteAlignments(std::ostream& os, const std::vector<Alignment>& a) {
  os << kAlignmentHeader << '\n';
  for (const auto& u : a) {
    Check(!u.phonemes.empty(), ErrorCode::kInvalidArgument,
          "alignment without phonemes: " + u.utterance_id);
    for (const auto& p : u.phonemes) {
      os << u.utterance_id << '\t' << u.speaker_id << '\t' << p.symbol << '\t'
         << FormatSeconds(p.start_s) << '\t' << FormatSeconds(p.end_s) << '\n';
    }
  }
}

void SaveAlignments(const std::string& path, const std::vector<Alignment>& a) {
  std::ofstream os(path);
  if (!os) Fail(ErrorCode::kUnreadableFile, "cannot write " + path);
  WriteAlignments(os, a);
}

std::int64_t DurationFrames(double start_s, double end_s, int sample_rate,
                            int hop) {
  Check(sample_rate > 0 && hop > 0, ErrorCode::kInvalidArgument,
        "sample rate and hop must be positive");
  Check(std::isfinite(start_s) && std::isfinite(end_s) && end_s >= start_s,
        ErrorCode::kInvalidArgument, "bad interval");
  const double r = static_cast<double>(sample_rate) / hop;
  return std::llround(end_s * r) - std::llround(start_s * r);
}

std::vector<int> AlignmentFrames(const Alignment& a, int sample_rate, int hop) {
  std::vector<int> f;
  f.reserve(a.phonemes.size());
  for (const auto& p : a.phonemes) {
    f.push_back(static_cast<int>(DurationFrames(p.start_s, p.end_s, sample_rate, hop)));
  }
  return f;
}

const char* ConditioningModeName(ConditioningMode mode) {
  switch (mode) {
    case ConditioningMode::kNone: return "NONE";
    case ConditioningMode::kNoise: return "NOISE";
    case ConditioningMode::kSpeakerEmb: return "SPEAKER_EMB";
    case ConditioningMode::kUtteranceEmb: return "UTTERANCE_EMB";
  }
  return "?";
}

ConditioningMode ParseConditioningMode(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  for (ConditioningMode m : kAllConditioningModes) {
    if (upper == ConditioningModeName(m)) return m;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown conditioning mode '" + name + "'");
}

std::size_t DurationPredictorConfig::vocabulary() const {
  return vocab_size == 0 ? PhonemeVocabulary().size() : vocab_size;
}

void DurationPredictorConfig::Validate() const {
  Check(model_dim > 0 && heads > 0 && model_dim % heads == 0,
        ErrorCode::kInvalidArgument, "model_dim must be divisible by heads");
  Check(layers > 0 && ffn_dim > 0 && cond_dim > 0, ErrorCode::kInvalidArgument,
        "predictor sizes must be positive");
  Check(initial_frames > 0.0, ErrorCode::kInvalidArgument,
        "initial_frames must be positive");
}

template <typename T>
DurationPredictor<T>::DurationPredictor(const DurationPredictorConfig& cfg,
                                        std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.Validate();
  std::mt19937_64 rng(seed);
  const std::size_t d = cfg_.model_dim;
  embedding_ = params_.Register(
      "duration.embedding", nn::TruncatedNormal<T>({cfg_.vocabulary(), d}, 1.0, rng));
  cond_proj_ = nn::LinearLayer<T>(params_, "duration.cond", cfg_.cond_dim, d, rng);
  for (std::size_t i = 0; i < cfg_.layers; ++i) {
    layers_.emplace_back(params_, "duration.layer" + std::to_string(i), d,
                         cfg_.ffn_dim, cfg_.heads, rng);
  }
  norm_ = nn::LayerNormLayer<T>(params_, "duration.norm", d);
  head_ = nn::LinearLayer<T>(params_, "duration.head", d, 1, rng);
  // softplus^-1
  params_.Get("duration.head.bias").data()[0] =
      static_cast<T>(std::log(std::expm1(cfg_.initial_frames)));
}

template <typename T>
Tensor<T> DurationPredictor<T>::Forward(std::span<const int> symbols,
                                        ConditioningMode mode,
                                        const std::vector<double>* cond) const {
  const std::size_t n = symbols.size(), v = cfg_.vocabulary(), d = cfg_.model_dim;
  Check(n > 0, ErrorCode::kInvalidArgument, "empty phoneme sequence");
  std::vector<T> onehot(n * v, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    Check(symbols[i] >= 0 && static_cast<std::size_t>(symbols[i]) < v,
          ErrorCode::kInvalidArgument, "phoneme id out of range");
    onehot[i * v + static_cast<std::size_t>(symbols[i])] = T(1);
  }
  if (cond != nullptr) {
    Check(cond->size() == cfg_.cond_dim, ErrorCode::kShapeMismatch,
          "conditioning vector has " + std::to_string(cond->size()) +
              " dims, expected " + std::to_string(cfg_.cond_dim));
  }
  Tensor<T> x = nn::MatMul(Tensor<T>::FromData({n, v}, std::move(onehot)), embedding_);
  auto pos = Positions(n, d);
  x = nn::Add(x, Tensor<T>::FromData({n, d}, std::vector<T>(pos.begin(), pos.end())));
  if (mode != ConditioningMode::kNone) {
    Check(cond != nullptr, ErrorCode::kInvalidArgument,
          std::string("mode ") + ConditioningModeName(mode) +
              " needs a conditioning vector");
    Tensor<T> c = Tensor<T>::FromData({cfg_.cond_dim},
                                      std::vector<T>(cond->begin(), cond->end()));
    x = nn::AddBias(x, cond_proj_.Forward(c));
  }
  for (const auto& layer : layers_) x = layer.Forward(x);
  x = head_.Forward(norm_.Forward(x));
  return nn::Softplus(nn::Reshape(x, {n}));
}

template <typename T>
std::vector<double> DurationPredictor<T>::Predict(
    std::span<const int> symbols, ConditioningMode mode,
    const std::vector<double>* cond) const {
  nn::NoGradGuard no_grad;
  Tensor<T> y = Forward(symbols, mode, cond);
  return std::vector<double>(y.data().begin(), y.data().end());
}

template <typename T>
Tensor<T> LogDurationL1(const Tensor<T>& pred, std::span<const int> frames) {
  Check(pred.rank() == 1 && pred.dim(0) == frames.size(), ErrorCode::kShapeMismatch,
        "prediction and target lengths differ");
  std::vector<T> target(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Check(frames[i] >= 0, ErrorCode::kInvalidArgument, "negative frame count");
    target[i] = static_cast<T>(std::log1p(static_cast<double>(frames[i])));
  }
  Tensor<T> t = Tensor<T>::FromData({frames.size()}, std::move(target));
  return nn::Mean(nn::Abs(nn::Sub(nn::Log(nn::Affine(pred, T(1), T(1))), t)));
}

DurationDataset BuildDurationDataset(const std::vector<Alignment>& alignments,
                                     EmbeddingStore embeddings,
                                     double test_fraction, int sample_rate,
                                     int hop) {
  Check(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::kInvalidArgument,
        "test_fraction must be in (0, 1)");
  DurationDataset data;
  for (const auto& a : alignments) {
    DurationExample ex{a.Sequence(), AlignmentFrames(a, sample_rate, hop)};
    data.speaker_utterances[a.speaker_id].push_back(a.utterance_id);
    if (!embeddings.empty()) {
      auto it = embeddings.find(a.utterance_id);
      Check(it != embeddings.end(), ErrorCode::kDataError,
            "no embedding for utterance " + a.utterance_id);
      if (data.embedding_dim == 0) data.embedding_dim = it->second.size();
      Check(it->second.size() == data.embedding_dim && data.embedding_dim > 0,
            ErrorCode::kDataError, "inconsistent embedding dims");
    }
    (HashUnit(a.utterance_id) < test_fraction ? data.test : data.train)
        .push_back(std::move(ex));
  }
  for (auto& [spk, utts] : data.speaker_utterances) std::sort(utts.begin(), utts.end());
  Check(!data.train.empty() && !data.test.empty(), ErrorCode::kDataError,
        "duration split left an empty train or test set");
  data.embeddings = std::move(embeddings);
  return data;
}

std::optional<std::vector<double>> ConditioningVector(
    const DurationDataset& data, const PhonemeSequence& seq,
    ConditioningMode mode, std::mt19937_64& rng) {
  if (mode == ConditioningMode::kNone) return std::nullopt;
  Check(data.embedding_dim > 0, ErrorCode::kDataError,
        std::string(ConditioningModeName(mode)) + " needs embeddings");
  if (mode == ConditioningMode::kNoise) {
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(double(data.embedding_dim)));
    std::vector<double> v(data.embedding_dim);
    for (auto& x : v) x = g(rng);
    return v;
  }
  std::string id = seq.utterance_id;
  if (mode == ConditioningMode::kSpeakerEmb) {
    auto spk = data.speaker_utterances.find(seq.speaker_id);
    if (spk != data.speaker_utterances.end() && spk->second.size() > 1) {
      const auto& utts = spk->second;
      auto it = std::lower_bound(utts.begin(), utts.end(), id);
      std::size_t i = static_cast<std::size_t>(it - utts.begin());
      id = utts[(i + 1) % utts.size()];
    }
  }
  auto it = data.embeddings.find(id);
  Check(it != data.embeddings.end(), ErrorCode::kDataError, "no embedding for " + id);
  return it->second;
}

namespace {

DurationMetrics Evaluate(const DurationPredictor<float>& model,
                         const DurationDataset& data, ConditioningMode mode,
                         std::uint64_t seed) {
  std::mt19937_64 noise_rng(seed ^ 0x6e6f697365ULL);
  std::vector<double> target, pred;
  for (const auto& ex : data.test) {
    auto cond = ConditioningVector(data, ex.sequence, mode, noise_rng);
    auto p = model.Predict(ex.sequence.symbols, mode, cond ? &*cond : nullptr);
    pred.insert(pred.end(), p.begin(), p.end());
    target.insert(target.end(), ex.frames.begin(), ex.frames.end());
  }
  return {Mae(target, pred), Rmse(target, pred), Wder(target, pred), Ccc(target, pred)};
}

}  // namespace

std::vector<DurationArmResult> RunConditioningExperiment(
    const DurationDataset& data, std::span<const ConditioningMode> modes,
    const DurationTrainConfig& cfg) {
  Check(cfg.epochs > 0 && cfg.batch_size > 0 && cfg.lr > 0.0,
        ErrorCode::kInvalidArgument, "bad duration training config");
  Check(!data.train.empty() && !data.test.empty(), ErrorCode::kDataError,
        "empty duration dataset");
  DurationPredictorConfig mcfg = cfg.model;
  if (data.embedding_dim > 0) mcfg.cond_dim = data.embedding_dim;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& ex : data.train) {
    for (int f : ex.frames) total += f;
    count += ex.frames.size();
  }
  mcfg.initial_frames = std::max(0.5, total / static_cast<double>(count));

  std::vector<DurationArmResult> results;
  for (ConditioningMode mode : modes) {
    DurationPredictor<float> model(mcfg, cfg.seed);
    nn::Adam<float> opt(model.params(), nn::AdamConfig{cfg.lr});
    std::mt19937_64 order_rng(cfg.seed ^ 0x6f72646572ULL);
    std::mt19937_64 noise_rng(cfg.seed ^ 0x747261696eULL);
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);

    DurationArmResult r;
    r.mode = mode;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), order_rng);
      double epoch_loss = 0.0;
      std::size_t epoch_tokens = 0;
      for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
        const std::size_t e = std::min(order.size(), b + cfg.batch_size);
        std::size_t tokens = 0;
        for (std::size_t i = b; i < e; ++i) tokens += data.train[order[i]].frames.size();
        model.params().ZeroGrad();
        Tensor<float> loss;
        for (std::size_t i = b; i < e; ++i) {
          const auto& ex = data.train[order[i]];
          auto cond = ConditioningVector(data, ex.sequence, mode, noise_rng);
          Tensor<float> l = nn::Scale(
              LogDurationL1(model.Forward(ex.sequence.symbols, mode,
                                          cond ? &*cond : nullptr),
                            ex.frames),
              static_cast<float>(ex.frames.size()) / static_cast<float>(tokens));
          loss = loss.defined() ? nn::Add(loss, l) : l;
        }
        loss.Backward();
        opt.Step();
        epoch_loss += loss.item() * static_cast<double>(tokens);
        epoch_tokens += tokens;
      }
      r.epoch_loss.push_back(epoch_loss / static_cast<double>(epoch_tokens));
    }
    r.metrics = Evaluate(model, data, mode, cfg.seed);
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<DurationArmResult> MedianOverSeeds(
    const std::vector<std::vector<DurationArmResult>>& runs) {
  Check(!runs.empty(), ErrorCode::kInvalidArgument, "no runs");
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  std::vector<DurationArmResult> out;
  for (std::size_t a = 0; a < runs.front().size(); ++a) {
    std::vector<double> mae, rmse, wder, ccc;
    for (const auto& run : runs) {
      Check(run.size() == runs.front().size() && run[a].mode == runs.front()[a].mode,
            ErrorCode::kInvalidArgument, "runs cover different modes");
      mae.push_back(run[a].metrics.mae);
      rmse.push_back(run[a].metrics.rmse);
      wder.push_back(run[a].metrics.wder);
      ccc.push_back(run[a].metrics.ccc);
    }
    DurationArmResult r;
    r.mode = runs.front()[a].mode;
    r.metrics = {median(mae), median(rmse), median(wder), median(ccc)};
    out.push_back(std::move(r));
  }
  return out;
}

std::string DurationReport(const std::vector<DurationArmResult>& results,
                           const std::string& extra_json) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json modes = nlohmann::ordered_json::object();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["MAE"] = r.metrics.mae;
    row["RMSE"] = r.metrics.rmse;
    row["WDER"] = r.metrics.wder;
    row["CCC"] = r.metrics.ccc;
    if (!r.epoch_loss.empty()) row["final_train_loss"] = r.epoch_loss.back();
    modes[ConditioningModeName(r.mode)] = row;
  }
  j["results"] = modes;
  auto ref = [](double mae, double rmse, double wder, double ccc) {
    return nlohmann::ordered_json{{"MAE", mae}, {"RMSE", rmse}, {"WDER", wder}, {"CCC", ccc}};
  };
  j["published_reference"] = {{"NONE", ref(2.045, 3.836, 0.9309, 0.771)},
                          {"NOISE", ref(2.198, 4.366, 0.9364, 0.7328)},
                          {"SPEAKER_EMB", ref(1.87, 3.607, 0.949, 0.801)},
                          {"UTTERANCE_EMB", ref(1.869, 3.503, 0.9501, 0.8038)}};
  auto extra = nlohmann::ordered_json::parse(extra_json);
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  return j.dump(2);
}

TempoCorpus GenerateTempoCorpus(const TempoCorpusConfig& cfg, std::uint64_t seed) {
  Check(cfg.speakers > 0 && cfg.utterances_per_speaker > 0 &&
            cfg.min_phonemes > 0 && cfg.max_phonemes >= cfg.min_phonemes &&
            cfg.active_phonemes > 0 && cfg.embedding_dim > 0 &&
            cfg.min_tempo > 0.0 && cfg.max_tempo >= cfg.min_tempo &&
            cfg.min_base_frames > 0.0 && cfg.max_base_frames >= cfg.min_base_frames,
        ErrorCode::kInvalidArgument, "bad tempo corpus config");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& vocab = PhonemeVocabulary();
  const int active = std::min<int>(cfg.active_phonemes, static_cast<int>(vocab.size()) - 3);
  const std::size_t dim = cfg.embedding_dim;

  auto unit = [&] {
    std::vector<double> v(dim);
    double n = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      n += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n);
    return v;
  };

  std::uniform_real_distribution<double> base_dist(cfg.min_base_frames, cfg.max_base_frames);
  std::vector<double> base(active);
  for (auto& b : base) b = base_dist(rng);
  const std::vector<double> tempo_dir = unit();
  const double log_span = 0.5 * std::log(cfg.max_tempo / cfg.min_tempo) + 1e-12;
  const double hop_s = static_cast<double>(kDurationHop) / cfg.sample_rate;

  TempoCorpus out;
  std::uniform_real_distribution<double> log_tempo(std::log(cfg.min_tempo),
                                                   std::log(cfg.max_tempo));
  std::uniform_int_distribution<int> length(cfg.min_phonemes, cfg.max_phonemes);
  std::uniform_int_distribution<int> symbol(0, active - 1);
  for (int s = 0; s < cfg.speakers; ++s) {
    char spk[32];
    std::snprintf(spk, sizeof(spk), "spk%03d", s);
    const double tempo = std::exp(log_tempo(rng));
    const std::vector<double> code = unit();
    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      char utt[48];
      std::snprintf(utt, sizeof(utt), "%s_%04d", spk, u);
      const double rate = std::exp(cfg.utterance_rate_sd * normal(rng));
      Alignment a{utt, spk, {}};
      long cursor = 0;
      const int n = length(rng);
      for (int i = 0; i < n; ++i) {
        const int p = symbol(rng);
        const double f = base[p] * tempo * rate * std::exp(cfg.jitter_sd * normal(rng));
        const long frames = std::max(1L, std::lround(f));
        a.phonemes.push_back({vocab[p], cursor * hop_s, (cursor + frames) * hop_s});
        cursor += frames;
      }
      out.alignments.push_back(std::move(a));

      const double z = std::log(tempo * rate) / log_span;
      const std::vector<double> noise = unit();
      std::vector<double> e(dim);
      double norm = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        e[k] = code[k] + cfg.embedding_tempo_weight * z * tempo_dir[k] +
               cfg.embedding_noise * noise[k];
        norm += e[k] * e[k];
      }
      for (auto& x : e) x /= std::sqrt(norm);
      out.embeddings[utt] = std::move(e);
    }
  }
  return out;
}

template class DurationPredictor<float>;
template class DurationPredictor<double>;
template Tensor<float> LogDurationL1(const Tensor<float>&, std::span<const int>);
template Tensor<double> LogDurationL1(const Tensor<double>&, std::span<const int>);

}  // namespace vemb
