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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "test_util.h"
#include "vemb/config.h"
#include "vemb/embedding_io.h"
#include "vemb/error.h"

using namespace vemb;

namespace {

ErrorCode ConfigError(const std::string& text) {
  try {
    ParseConfig(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

ErrorCode ReadError(const std::string& bytes) {
  std::istringstream is(bytes);
  try {
    ReadEmbeddings(is);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("config: defaults") {
  const PipelineConfig c = ParseConfig("");
  CHECK(c.encoder.sample_rate == 24000);
  CHECK(c.encoder.segment_seconds == 4.0);
  CHECK(c.encoder.embedding_dim == 2048);
  CHECK(c.encoder.mel.hop_length == 600);
  CHECK(c.encoder.spec.dropout == 0.4);
  CHECK(c.encoder.mel_vit.heads == 32);
  CHECK(c.encoder.pitch_vit.patch == 9);
  CHECK(c.loss.kind == MarginKind::kAmSoftmax);
  CHECK(c.loss.scale == 30.0);
  CHECK(c.loss.margin == 0.4);
  CHECK(c.train.lr == 1e-4);
  CHECK(c.train.batch_size == 52);
  CHECK(c.train.val_fraction == 0.1);
  CHECK(c.duration.model.model_dim == 128);
  CHECK(c.duration.model.heads == 4);
  CHECK(c.duration.model.layers == 2);
  CHECK(c.duration.hop == 256);
}

TEST_CASE("config: canonical text round-trips and hashes stably") {
  for (const PipelineConfig& c :
       {ParseConfig(""), DeskConfig(), ParseConfig(testing::TinyPipelineText())}) {
    const std::string text = ConfigToText(c);
    const PipelineConfig again = ParseConfig(text);
    CHECK(ConfigToText(again) == text);
    CHECK(ConfigHash(again) == ConfigHash(c));
    CHECK(ConfigHash(c).size() == 16);
  }
  const PipelineConfig a = ParseConfig("[loss]\nkind = arcface\nmargin = 0.5\n");
  CHECK(a.loss.kind == MarginKind::kArcFace);
  CHECK(ConfigHash(a) != ConfigHash(ParseConfig("")));
  // comments and spacing are irrelevant
  CHECK(ConfigHash(ParseConfig("# x\n[train]\n  seed =  7 \n")) ==
        ConfigHash(ParseConfig("[train]\nseed = 7")));
  CHECK(ConfigHash(ParseConfig("[train]\nseed = 7")) != ConfigHash(ParseConfig("")));
  const PipelineConfig sr = ParseConfig("[audio]\nsample_rate = 16000\n");
  CHECK(sr.encoder.cqt.sample_rate == 16000);
  CHECK(sr.encoder.mel.sample_rate == 16000);
  CHECK(sr.encoder.pitch.sample_rate == 16000);
}

TEST_CASE("config: unknown or malformed input is rejected") {
  CHECK(ConfigError("[train]\nlearning_rate = 0.1\n") == ErrorCode::kParse);
  CHECK(ConfigError("[optimizer]\n") == ErrorCode::kParse);
  CHECK(ConfigError("seed = 1\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\nseed\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\nseed = one\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\nlr = 1e-3x\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\nlr = nan\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\nseed = 1\nseed = 2\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train\n") == ErrorCode::kParse);
  CHECK(ConfigError("[loss]\nkind = triplet\n") == ErrorCode::kParse);
  CHECK(ConfigError("[mel_vit]\nheads = 7\n") == ErrorCode::kParse);
  CHECK(ConfigError("[train]\ndeterministic = maybe\n") == ErrorCode::kParse);
  CHECK(ConfigError("[spec]\ndropout = 1.5\n") == ErrorCode::kParse);
  CHECK_THROWS_AS(LoadConfig("/nonexistent/vemb.cfg"), Error);
}

TEST_CASE("embedding files round-trip bit-exactly") {
  std::mt19937 rng(4);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 5; ++i) {
    EmbeddingRecord r;
    r.id = "utt/" + std::to_string(i) + (i == 3 ? "-\xc3\xa9" : "");
    for (int k = 0; k < 7; ++k) {
      std::uint32_t bits = rng();
      float f;
      std::memcpy(&f, &bits, 4);
      if (!std::isfinite(f)) f = -0.0f;
      r.values.push_back(f);
    }
    records.push_back(r);
  }
  std::ostringstream os;
  WriteEmbeddings(os, records);
  const std::string bytes = os.str();
  CHECK(bytes.substr(0, 4) == "VEC1");
  std::size_t expected = 12;
  for (const auto& r : records) expected += 2 + r.id.size() + 4 * r.values.size();
  CHECK(bytes.size() == expected);
  std::istringstream is(bytes);
  const auto back = ReadEmbeddings(is);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == records[i].id);
    CHECK(std::memcmp(back[i].values.data(), records[i].values.data(), 7 * 4) == 0);
  }
  std::ostringstream again;
  WriteEmbeddings(again, back);
  CHECK(again.str() == bytes);

  const auto dir = testing::TempDir("vec");
  const std::string path = (dir / "e.vec").string();
  SaveEmbeddings(path, records);
  CHECK(LoadEmbeddings(path).size() == 5);
  std::filesystem::remove_all(dir);

  std::ostringstream empty;
  WriteEmbeddings(empty, {});
  std::istringstream empty_in(empty.str());
  CHECK(ReadEmbeddings(empty_in).empty());
}

TEST_CASE("embedding files: designated errors") {
  const std::vector<EmbeddingRecord> records = {{"a", {1.0f, 2.0f}}, {"b", {3.0f, 4.0f}}};
  std::ostringstream os;
  WriteEmbeddings(os, records);
  const std::string bytes = os.str();
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK(ReadError(bad) == ErrorCode::kBadMagic);
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    CHECK(ReadError(bytes.substr(0, cut)) == ErrorCode::kTruncated);
  }
  CHECK(ReadError(bytes + "z") == ErrorCode::kCorrupt);

  std::ostringstream sink;
  CHECK_THROWS_AS(WriteEmbeddings(sink, {{"a", {1.0f}}, {"b", {1.0f, 2.0f}}}), Error);
  CHECK_THROWS_AS(ToEmbeddingStore({{"a", {1.0f}}, {"a", {2.0f}}}), Error);
  CHECK(ToEmbeddingStore(records).at("b") == std::vector<double>{3.0, 4.0});
}
