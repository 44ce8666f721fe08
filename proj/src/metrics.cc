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

#include "vemb/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vemb/error.h"

namespace vemb {

namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  Check(x.size() == y.size(), ErrorCode::kShapeMismatch,
        "length mismatch: " + std::to_string(x.size()) + " vs " +
            std::to_string(y.size()));
  Check(!x.empty(), ErrorCode::kInvalidArgument, "empty input");
}

void CheckScores(const ScoreSet& s) {
  Check(!s.positive.empty() && !s.negative.empty(), ErrorCode::kInvalidArgument,
        "need at least one positive and one negative score");
}

double Mean(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

}  // namespace

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  CheckPair(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  Check(na > 0.0 && nb > 0.0, ErrorCode::kNumeric,
        "cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double TprAtFpr(const ScoreSet& s, double fpr_level) {
  CheckScores(s);
  Check(fpr_level > 0.0 && fpr_level <= 1.0, ErrorCode::kInvalidArgument,
        "FPR level must be in (0, 1]");
  std::vector<double> neg = s.negative;
  std::sort(neg.begin(), neg.end(), std::greater<>());
  const auto k = static_cast<std::size_t>(
      std::floor(fpr_level * static_cast<double>(neg.size())));
  const double threshold = k == 0 ? neg.front() : neg[k - 1];
  const auto above = std::count_if(s.positive.begin(), s.positive.end(),
                                   [&](double p) { return p > threshold; });
  return static_cast<double>(above) / static_cast<double>(s.positive.size());
}

double Eer(const ScoreSet& s) {
  CheckScores(s);
  std::vector<double> pos = s.positive, neg = s.negative;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  double prev_fpr = 0.0, prev_fnr = 0.0, prev_d = 0.0;
  bool first = true;
  for (double t : all) {
    const double fnr =
        static_cast<double>(std::lower_bound(pos.begin(), pos.end(), t) - pos.begin()) / np;
    const double fpr =
        static_cast<double>(neg.end() - std::upper_bound(neg.begin(), neg.end(), t)) / nn;
    const double d = fpr - fnr;
    if (d <= 0.0) {
      if (d == 0.0 || first) return first ? 0.5 * (fpr + fnr) : fpr;
      const double a = prev_d / (prev_d - d);
      return prev_fpr + a * (fpr - prev_fpr);
    }
    prev_fpr = fpr;
    prev_fnr = fnr;
    prev_d = d;
    first = false;
  }
  // The last distinct score always has FPR == 0, so this is unreachable.
  return prev_fnr;
}

double Wder(std::span<const double> x, std::span<const double> x_hat) {
  CheckPair(x, x_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::abs(x[i] - x_hat[i]);
    acc += e <= 1.0 ? 1.0 : 1.0 / e;
  }
  return acc / static_cast<double>(x.size());
}

double Mae(std::span<const double> x, std::span<const double> x_hat) {
  CheckPair(x, x_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - x_hat[i]);
  return acc / static_cast<double>(x.size());
}

double Rmse(std::span<const double> x, std::span<const double> x_hat) {
  CheckPair(x, x_hat);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += (x[i] - x_hat[i]) * (x[i] - x_hat[i]);
  }
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double Ccc(std::span<const double> x, std::span<const double> x_hat) {
  CheckPair(x, x_hat);
  Check(x.size() >= 2, ErrorCode::kInvalidArgument, "CCC needs two elements");
  const double mx = Mean(x), my = Mean(x_hat);
  double vx = 0.0, vy = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (x_hat[i] - my) * (x_hat[i] - my);
    cov += (x[i] - mx) * (x_hat[i] - my);
  }
  const double n = static_cast<double>(x.size());
  const double denom = vx / n + vy / n + (mx - my) * (mx - my);
  Check(denom > 0.0, ErrorCode::kNumeric, "CCC undefined for constant inputs");
  return 2.0 * (cov / n) / denom;
}

ScoreSet ScoreTrials(const EmbeddingStore& store, const TrialList& trials) {
  Check(!trials.empty(), ErrorCode::kInvalidArgument, "empty trial list");
  ScoreSet s;
  for (const Trial& t : trials) {
    auto a = store.find(t.id_a), b = store.find(t.id_b);
    Check(a != store.end() && b != store.end(), ErrorCode::kDataError,
          "trial references unknown id '" +
              (a == store.end() ? t.id_a : t.id_b) + "'");
    const double c = CosineSimilarity(a->second, b->second);
    (t.is_target ? s.positive : s.negative).push_back(c);
  }
  return s;
}

TrialList ReadTrialList(const std::string& path) {
  std::ifstream in(path);
  Check(in.good(), ErrorCode::kUnreadableFile, "cannot open " + path);
  TrialList trials;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    Check(cols.size() == 3 && (cols[2] == "0" || cols[2] == "1") &&
              !cols[0].empty() && !cols[1].empty(),
          ErrorCode::kParse,
          path + ":" + std::to_string(lineno) + ": expected id_a<TAB>id_b<TAB>0|1");
    trials.push_back({cols[0], cols[1], cols[2] == "1"});
  }
  return trials;
}

void WriteTrialList(const std::string& path, const TrialList& trials) {
  std::ofstream out(path);
  Check(out.good(), ErrorCode::kUnreadableFile, "cannot write " + path);
  for (const Trial& t : trials) {
    out << t.id_a << '\t' << t.id_b << '\t' << (t.is_target ? 1 : 0) << '\n';
  }
}

std::string MetricsReport(const ScoreSet& s, const std::vector<double>& levels,
                          const std::string& extra_json) {
  nlohmann::ordered_json j;
  j["positives"] = s.positive.size();
  j["negatives"] = s.negative.size();
  nlohmann::ordered_json tpr = nlohmann::ordered_json::object();
  for (double n : levels) {
    std::ostringstream key;
    key << n;
    tpr[key.str()] = TprAtFpr(s, n);
  }
  j["tpr_at_fpr"] = tpr;
  j["eer"] = Eer(s);
  auto extra = nlohmann::ordered_json::parse(extra_json);
  if (extra.is_object()) {
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  }
  return j.dump(2);
}

}  // namespace vemb
