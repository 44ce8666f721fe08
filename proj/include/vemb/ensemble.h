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

#ifndef VEMB_ENSEMBLE_H_
#define VEMB_ENSEMBLE_H_

#include <span>
#include <string>
#include <vector>

#include "vemb/metrics.h"

namespace vemb {

// y = w1 * (x1 - shift) * scale + w2 * x2
struct FusionConfig {
  std::string name = "custom";
  double w1 = 0.5;
  double w2 = 0.5;
  double shift = 0.99;
  double scale = 100.0;
  // Published EER (%) for this preset; negative when absent.
  double published_eer = -1.0;
};

// Y1, Y2 and Y3 in that order.
const std::vector<FusionConfig>& FusionPresets();
// Accepts "y1", "y2", "y3" (any case).
FusionConfig FusionPreset(const std::string& name);

std::vector<double> FuseScores(std::span<const double> x1,
                               std::span<const double> x2,
                               const FusionConfig& cfg);

struct FusionResult {
  FusionConfig config;
  double eer = 0.0;
};

// Fuses per preset and splits by trial label before computing EER.
std::vector<FusionResult> EvaluateFusion(const TrialList& trials,
                                         std::span<const double> x1,
                                         std::span<const double> x2,
                                         const std::vector<FusionConfig>& presets);

// "trial_index<TAB>score" per line; indices must be 0..n-1 in any order.
std::vector<double> ReadScoreFile(const std::string& path);
void WriteScoreFile(const std::string& path, std::span<const double> scores);

std::string FusionReport(const std::vector<FusionResult>& results,
                         double eer_x1, double eer_x2,
                         const std::string& extra_json = "{}");

}  // namespace vemb

#endif  // VEMB_ENSEMBLE_H_
