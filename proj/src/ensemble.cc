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

#include "vemb/ensemble.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "vemb/error.h"

namespace vemb {

const std::vector<FusionConfig>& FusionPresets() {
  static const std::vector<FusionConfig> presets = {
      {"y1", 0.5, 0.5, 0.99, 100.0, 23.625},
      {"y2", 0.35, 0.65, 0.99, 100.0, 20.762},
      {"y3", 0.25, 0.75, 0.99, 100.0, 20.669},
  };
  return presets;
}

FusionConfig FusionPreset(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const auto& p : FusionPresets()) {
    if (p.name == lower) return p;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown fusion preset '" + name + "'");
}

std::vector<double> FuseScores(std::span<const double> x1,
                               std::span<const double> x2,
                               const FusionConfig& cfg) {
  Check(x1.size() == x2.size(), ErrorCode::kShapeMismatch,
        "score lists differ in length: " + std::to_string(x1.size()) + " vs " +
            std::to_string(x2.size()));
  std::vector<double> y(x1.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = cfg.w1 * (x1[i] - cfg.shift) * cfg.scale + cfg.w2 * x2[i];
  }
  return y;
}

std::vector<FusionResult> EvaluateFusion(const TrialList& trials,
                                         std::span<const double> x1,
                                         std::span<const double> x2,
                                         const std::vector<FusionConfig>& presets) {
  Check(trials.size() == x1.size(), ErrorCode::kShapeMismatch,
        "trial list and score list differ in length");
  std::vector<FusionResult> out;
  for (const auto& p : presets) {
    const auto y = FuseScores(x1, x2, p);
    ScoreSet s;
    for (std::size_t i = 0; i < y.size(); ++i) {
      (trials[i].is_target ? s.positive : s.negative).push_back(y[i]);
    }
    out.push_back({p, Eer(s)});
  }
  return out;
}

std::vector<double> ReadScoreFile(const std::string& path) {
  std::ifstream in(path);
  Check(in.good(), ErrorCode::kUnreadableFile, "cannot open " + path);
  std::vector<std::pair<long long, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long idx = -1;
    double score = 0.0;
    char tab = 0;
    ss >> idx;
    ss.get(tab);
    ss >> score;
    Check(!ss.fail() && tab == '\t' && idx >= 0 && (ss >> std::ws).eof(),
          ErrorCode::kParse,
          path + ":" + std::to_string(lineno) + ": expected trial_index<TAB>score");
    rows.emplace_back(idx, score);
  }
  std::vector<double> scores(rows.size());
  std::vector<bool> seen(rows.size(), false);
  for (const auto& [idx, score] : rows) {
    Check(static_cast<std::size_t>(idx) < rows.size() && !seen[idx],
          ErrorCode::kParse, path + ": trial indices must be 0..n-1 without repeats");
    seen[idx] = true;
    scores[idx] = score;
  }
  return scores;
}

void WriteScoreFile(const std::string& path, std::span<const double> scores) {
  std::ofstream out(path);
  Check(out.good(), ErrorCode::kUnreadableFile, "cannot write " + path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << i << '\t' << scores[i] << '\n';
  }
}

std::string FusionReport(const std::vector<FusionResult>& results,
                         double eer_x1, double eer_x2,
                         const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["eer_system1"] = eer_x1;
  j["eer_system2"] = eer_x2;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json row;
    row["preset"] = r.config.name;
    row["w1"] = r.config.w1;
    row["w2"] = r.config.w2;
    row["shift"] = r.config.shift;
    row["scale"] = r.config.scale;
    row["eer"] = r.eer;
    if (r.config.published_eer >= 0.0) row["published_eer_percent"] = r.config.published_eer;
    rows.push_back(row);
  }
  j["fusion"] = rows;
  auto extra = nlohmann::ordered_json::parse(extra_json);
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  return j.dump(2);
}

}  // namespace vemb
