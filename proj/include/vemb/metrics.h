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

#ifndef VEMB_METRICS_H_
#define VEMB_METRICS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

namespace vemb {

struct Trial {
  std::string id_a;
  std::string id_b;
  bool is_target = false;
};

using TrialList = std::vector<Trial>;

struct ScoreSet {
  std::vector<double> positive;
  std::vector<double> negative;
};

using EmbeddingStore = std::map<std::string, std::vector<double>>;

// The five reference operating points.
inline const std::vector<double> kReferenceFprLevels = {0.5, 0.2, 0.1, 0.05, 0.01};

// Throws kShapeMismatch on unequal dims and kNumeric on a zero vector.
double CosineSimilarity(std::span<const double> a, std::span<const double> b);

// k = floor(N * |negatives|). The threshold is the k-th largest negative
// (k == 0: the largest negative); returns the fraction of positives scoring
// strictly above it.
double TprAtFpr(const ScoreSet& s, double fpr_level);

// Error rates are evaluated at every distinct score t with FPR = #neg > t and
// FNR = #pos < t; the crossing is interpolated linearly between adjacent
// thresholds.
double Eer(const ScoreSet& s);

// Per element 1 if |x - x_hat| <= 1, else 1 / |x - x_hat|; then the mean.
double Wder(std::span<const double> x, std::span<const double> x_hat);
double Mae(std::span<const double> x, std::span<const double> x_hat);
double Rmse(std::span<const double> x, std::span<const double> x_hat);
// Lin's concordance correlation with population moments.
double Ccc(std::span<const double> x, std::span<const double> x_hat);

ScoreSet ScoreTrials(const EmbeddingStore& store, const TrialList& trials);

// "id_a<TAB>id_b<TAB>0|1" per line. Blank lines are skipped.
TrialList ReadTrialList(const std::string& path);
void WriteTrialList(const std::string& path, const TrialList& trials);

// JSON report with TPR at each level, EER and counts. `extra` is merged in
// at the top level when it holds a JSON object.
std::string MetricsReport(const ScoreSet& s, const std::vector<double>& levels,
                          const std::string& extra_json = "{}");

}  // namespace vemb

#endif  // VEMB_METRICS_H_
