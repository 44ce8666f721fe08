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

#include "vemb/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include "vemb/error.h"
#include "vemb/hash.h"

namespace vemb {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void BadValue(const std::string& v) {
  Fail(ErrorCode::kParse, "bad config value '" + v + "'");
}

template <typename V>
V ParseNumber(const std::string& v) {
  V out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(v);
  if constexpr (std::is_floating_point_v<V>) {
    if (!std::isfinite(out)) BadValue(v);
  }
  return out;
}

template <typename V>
std::string FormatNumber(V v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  if (out.empty()) BadValue(v);
  return out;
}

template <typename V> V ParseValue(const std::string& v);
template <> int ParseValue<int>(const std::string& v) { return ParseNumber<int>(v); }
template <> std::size_t ParseValue<std::size_t>(const std::string& v) {
  return ParseNumber<std::size_t>(v);
}
template <> double ParseValue<double>(const std::string& v) {
  return ParseNumber<double>(v);
}
template <> bool ParseValue<bool>(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  BadValue(v);
}
template <> std::vector<std::size_t> ParseValue<std::vector<std::size_t>>(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& s : SplitList(v)) out.push_back(ParseNumber<std::size_t>(s));
  return out;
}
template <> std::vector<double> ParseValue<std::vector<double>>(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : SplitList(v)) out.push_back(ParseNumber<double>(s));
  return out;
}
template <> ViTReadout ParseValue<ViTReadout>(const std::string& v) {
  if (v == "cls") return ViTReadout::kClassToken;
  if (v == "mean") return ViTReadout::kMean;
  BadValue(v);
}
template <> MarginKind ParseValue<MarginKind>(const std::string& v) {
  try {
    return ParseMarginKind(v);
  } catch (const Error&) {
    BadValue(v);
  }
}
template <> Precision ParseValue<Precision>(const std::string& v) {
  if (v == "float32") return Precision::kFloat32;
  if (v == "float64") return Precision::kFloat64;
  BadValue(v);
}
template <> ValidationSplit ParseValue<ValidationSplit>(const std::string& v) {
  if (v == "speaker") return ValidationSplit::kSpeaker;
  if (v == "clip") return ValidationSplit::kClip;
  BadValue(v);
}

std::string FormatValue(int v) { return FormatNumber(v); }
std::string FormatValue(std::size_t v) { return FormatNumber(v); }
std::string FormatValue(double v) { return FormatNumber(v); }
std::string FormatValue(bool v) { return v ? "true" : "false"; }
template <typename V>
std::string FormatValue(const std::vector<V>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += FormatNumber(v[i]);
  }
  return out;
}
std::string FormatValue(ViTReadout v) {
  return v == ViTReadout::kClassToken ? "cls" : "mean";
}
std::string FormatValue(MarginKind v) { return MarginKindName(v); }
std::string FormatValue(Precision v) {
  return v == Precision::kFloat32 ? "float32" : "float64";
}
std::string FormatValue(ValidationSplit v) {
  return v == ValidationSplit::kSpeaker ? "speaker" : "clip";
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename Accessor>
Field Bind(const std::string& section, const std::string& key, Accessor acc) {
  using V = std::remove_reference_t<decltype(acc(std::declval<PipelineConfig&>()))>;
  Field f{section, key, nullptr, nullptr};
  f.set = [acc](PipelineConfig& c, const std::string& v) {
    acc(c) = ParseValue<V>(v);
  };
  f.get = [acc](const PipelineConfig& c) {
    return FormatValue(acc(const_cast<PipelineConfig&>(c)));
  };
  return f;
}

#define VEMB_FIELD(section, key, expr) \
  Bind(section, key, [](PipelineConfig& c) -> auto& { return c.expr; })

std::vector<Field> VitFields(const std::string& section, ViTConfig EncoderConfig::*vit) {
  auto v = [vit](PipelineConfig& c) -> ViTConfig& { return c.encoder.*vit; };
  return {
      Bind(section, "embed_dim", [v](PipelineConfig& c) -> auto& { return v(c).embed_dim; }),
      Bind(section, "hidden_dim", [v](PipelineConfig& c) -> auto& { return v(c).hidden_dim; }),
      Bind(section, "heads", [v](PipelineConfig& c) -> auto& { return v(c).heads; }),
      Bind(section, "layers", [v](PipelineConfig& c) -> auto& { return v(c).layers; }),
      Bind(section, "out_dim", [v](PipelineConfig& c) -> auto& { return v(c).out_dim; }),
      Bind(section, "patch", [v](PipelineConfig& c) -> auto& { return v(c).patch; }),
      Bind(section, "readout", [v](PipelineConfig& c) -> auto& { return v(c).readout; }),
      Bind(section, "embed_init_std",
           [v](PipelineConfig& c) -> auto& { return v(c).embed_init_std; }),
  };
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f = {
        VEMB_FIELD("audio", "sample_rate", encoder.sample_rate),
        VEMB_FIELD("audio", "segment_seconds", encoder.segment_seconds),
        VEMB_FIELD("cqt", "octaves", encoder.cqt.octaves),
        VEMB_FIELD("cqt", "bins_per_octave", encoder.cqt.bins_per_octave),
        VEMB_FIELD("cqt", "min_frequency", encoder.cqt.min_frequency),
        VEMB_FIELD("cqt", "block_seconds", encoder.cqt.block_seconds),
        VEMB_FIELD("cqt", "frames_per_block", encoder.cqt.frames_per_block),
        VEMB_FIELD("cqt", "window_periods", encoder.cqt.window_periods),
        VEMB_FIELD("mel", "fft_size", encoder.mel.fft_size),
        VEMB_FIELD("mel", "win_length", encoder.mel.win_length),
        VEMB_FIELD("mel", "hop_length", encoder.mel.hop_length),
        VEMB_FIELD("mel", "n_mels", encoder.mel.n_mels),
        VEMB_FIELD("mel", "f_min", encoder.mel.f_min),
        VEMB_FIELD("mel", "f_max", encoder.mel.f_max),
        VEMB_FIELD("mel", "log_floor", encoder.mel.log_floor),
        VEMB_FIELD("pitch", "frame_period_seconds", encoder.pitch.frame_period_seconds),
        VEMB_FIELD("pitch", "f0_floor", encoder.pitch.f0_floor),
        VEMB_FIELD("pitch", "f0_ceil", encoder.pitch.f0_ceil),
        VEMB_FIELD("pitch", "channels_per_octave", encoder.pitch.channels_per_octave),
        VEMB_FIELD("pitch", "analysis_rate", encoder.pitch.analysis_rate),
        VEMB_FIELD("pitch", "stability_threshold", encoder.pitch.stability_threshold),
        VEMB_FIELD("pitch", "min_voiced_run", encoder.pitch.min_voiced_run),
        VEMB_FIELD("cwt", "scales", encoder.cwt.scales),
        VEMB_FIELD("spec", "channels", encoder.spec.channels),
        VEMB_FIELD("spec", "kernel", encoder.spec.kernel),
        VEMB_FIELD("spec", "stride", encoder.spec.stride),
        VEMB_FIELD("spec", "padding", encoder.spec.padding),
        VEMB_FIELD("spec", "dropout", encoder.spec.dropout),
    };
    for (auto& x : VitFields("mel_vit", &EncoderConfig::mel_vit)) f.push_back(x);
    for (auto& x : VitFields("pitch_vit", &EncoderConfig::pitch_vit)) f.push_back(x);
    std::vector<Field> rest = {
        VEMB_FIELD("model", "embedding_dim", encoder.embedding_dim),
        VEMB_FIELD("model", "precision", precision),
        VEMB_FIELD("loss", "kind", loss.kind),
        VEMB_FIELD("loss", "scale", loss.scale),
        VEMB_FIELD("loss", "margin", loss.margin),
        VEMB_FIELD("train", "lr", train.lr),
        VEMB_FIELD("train", "beta1", train.beta1),
        VEMB_FIELD("train", "beta2", train.beta2),
        VEMB_FIELD("train", "batch_size", train.batch_size),
        VEMB_FIELD("train", "epochs", train.epochs),
        VEMB_FIELD("train", "max_steps", train.max_steps),
        VEMB_FIELD("train", "seed", train.seed),
        VEMB_FIELD("train", "val_fraction", train.val_fraction),
        VEMB_FIELD("train", "val_split", train.val_split),
        VEMB_FIELD("train", "max_val_trials", train.max_val_trials),
        VEMB_FIELD("train", "redraw_segments", train.redraw_segments),
        VEMB_FIELD("train", "deterministic", train.deterministic),
        VEMB_FIELD("duration", "model_dim", duration.model.model_dim),
        VEMB_FIELD("duration", "heads", duration.model.heads),
        VEMB_FIELD("duration", "layers", duration.model.layers),
        VEMB_FIELD("duration", "ffn_dim", duration.model.ffn_dim),
        VEMB_FIELD("duration", "epochs", duration.epochs),
        VEMB_FIELD("duration", "batch_size", duration.batch_size),
        VEMB_FIELD("duration", "lr", duration.lr),
        VEMB_FIELD("duration", "seed", duration.seed),
        VEMB_FIELD("duration", "seeds", duration.seeds),
        VEMB_FIELD("duration", "test_fraction", duration.test_fraction),
        VEMB_FIELD("duration", "sample_rate", duration.sample_rate),
        VEMB_FIELD("duration", "hop", duration.hop),
    };
    f.insert(f.end(), rest.begin(), rest.end());
    return f;
  }();
  return fields;
}

#undef VEMB_FIELD

}  // namespace

void PipelineConfig::Finalize() {
  encoder.cqt.sample_rate = encoder.sample_rate;
  encoder.mel.sample_rate = encoder.sample_rate;
  encoder.pitch.sample_rate = encoder.sample_rate;
  encoder.Validate();
  loss.Validate();
  Check(train.lr > 0.0 && train.batch_size > 0 && train.epochs > 0 &&
            train.max_steps >= 0 && train.max_val_trials > 0,
        ErrorCode::kInvalidArgument, "bad [train] settings");
  Check(train.beta1 >= 0.0 && train.beta1 < 1.0 && train.beta2 >= 0.0 &&
            train.beta2 < 1.0,
        ErrorCode::kInvalidArgument, "Adam betas must be in [0, 1)");
  Check(train.val_fraction >= 0.0 && train.val_fraction < 1.0,
        ErrorCode::kInvalidArgument, "val_fraction must be in [0, 1)");
  duration.model.Validate();
  Check(duration.epochs > 0 && duration.batch_size > 0 && duration.lr > 0.0 &&
            duration.seeds > 0 && duration.sample_rate > 0 && duration.hop > 0 &&
            duration.test_fraction > 0.0 && duration.test_fraction < 1.0,
        ErrorCode::kInvalidArgument, "bad [duration] settings");
}

PipelineConfig ParseConfig(const std::string& text) {
  PipelineConfig cfg;
  std::set<std::string> sections, seen;
  for (const auto& f : Fields()) sections.insert(f.section);
  std::istringstream is(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = Trim(line);
    const std::string where = "config line " + std::to_string(lineno);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      Check(line.back() == ']', ErrorCode::kParse, where + ": bad section header");
      section = Trim(line.substr(1, line.size() - 2));
      Check(sections.count(section) != 0, ErrorCode::kParse,
            where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    Check(eq != std::string::npos, ErrorCode::kParse, where + ": expected key = value");
    Check(!section.empty(), ErrorCode::kParse, where + ": key outside a section");
    const std::string key = Trim(line.substr(0, eq)), value = Trim(line.substr(eq + 1));
    const auto it = std::find_if(Fields().begin(), Fields().end(), [&](const Field& f) {
      return f.section == section && f.key == key;
    });
    Check(it != Fields().end(), ErrorCode::kParse,
          where + ": unknown key " + section + "." + key);
    Check(seen.insert(section + "." + key).second, ErrorCode::kParse,
          where + ": duplicate key " + section + "." + key);
    try {
      it->set(cfg, value);
    } catch (const Error& e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  try {
    cfg.Finalize();
  } catch (const Error& e) {
    Fail(ErrorCode::kParse, std::string("invalid config: ") + e.what());
  }
  return cfg;
}

PipelineConfig LoadConfig(const std::string& path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorCode::kUnreadableFile, "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseConfig(ss.str());
}

std::string ConfigToText(const PipelineConfig& cfg) {
  std::string out, section;
  for (const auto& f : Fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::string ConfigHash(const PipelineConfig& cfg) {
  return HashHex(Fnv1a64(ConfigToText(cfg)));
}

PipelineConfig DeskConfig() {
  PipelineConfig c;
  EncoderConfig& e = c.encoder;
  e.segment_seconds = 2.0;
  e.cqt.octaves = 7;
  e.cqt.bins_per_octave = 12;
  e.cqt.min_frequency = 65.4;
  e.cqt.frames_per_block = 16;
  e.mel.n_mels = 48;
  e.cwt.scales = CwtConfig::DefaultScales(18);
  e.spec.channels = {1, 4, 8, 8, 16, 16, 16};
  for (ViTConfig* v : {&e.mel_vit, &e.pitch_vit}) {
    v->embed_dim = 32;
    v->hidden_dim = 64;
    v->heads = 4;
    v->layers = 1;
    v->out_dim = 64;
  }
  e.mel_vit.patch = 8;
  e.pitch_vit.patch = 9;
  e.embedding_dim = 128;
  c.train.lr = 1e-3;
  c.train.batch_size = 16;
  c.train.epochs = 10;
  c.train.val_split = ValidationSplit::kClip;
  c.train.val_fraction = 0.2;
  c.Finalize();
  return c;
}

}  // namespace vemb
