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

#ifndef VEMB_CONFIG_H_
#define VEMB_CONFIG_H_

#include <cstdint>
#include <string>

#include "vemb/duration.h"
#include "vemb/encoders.h"
#include "vemb/losses.h"

namespace vemb {

enum class Precision { kFloat32, kFloat64 };

enum class ValidationSplit { kSpeaker, kClip };

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 52;
  int epochs = 30;
  int max_steps = 0;  // 0: epochs * steps per epoch
  std::uint64_t seed = 1;
  double val_fraction = 0.1;
  ValidationSplit val_split = ValidationSplit::kSpeaker;
  int max_val_trials = 20000;
  bool redraw_segments = true;
  bool deterministic = true;
};

struct DurationSection {
  DurationPredictorConfig model;
  int epochs = 20;
  int batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int seeds = 1;
  double test_fraction = 0.2;
  int sample_rate = 24000;
  int hop = kDurationHop;
};

struct PipelineConfig {
  EncoderConfig encoder;
  MarginConfig loss;
  TrainConfig train;
  DurationSection duration;
  Precision precision = Precision::kFloat32;

  // Copies the shared sample rate into every frontend and validates.
  void Finalize();
};

// Flat "key = value" lines grouped under "[section]" headers; '#' starts a
// comment. Unknown sections or keys and malformed values throw kParse.
PipelineConfig ParseConfig(const std::string& text);
PipelineConfig LoadConfig(const std::string& path);
// Canonical text listing every key; parsing it gives the same config.
std::string ConfigToText(const PipelineConfig& cfg);
// Hash of the canonical text, 16 hex digits.
std::string ConfigHash(const PipelineConfig& cfg);

// Smaller model and 2 s segments, sized for single-core training.
PipelineConfig DeskConfig();

}  // namespace vemb

#endif  // VEMB_CONFIG_H_
