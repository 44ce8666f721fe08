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

#ifndef VEMB_EMBEDDING_IO_H_
#define VEMB_EMBEDDING_IO_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "vemb/metrics.h"

namespace vemb {

struct EmbeddingRecord {
  std::string id;
  std::vector<float> values;
};

// "VEC1", count u32, dim u32, then per record: id length u16, UTF-8 id and
// dim float32, all little-endian. kBadMagic, kTruncated or kCorrupt on read.
void WriteEmbeddings(std::ostream& os, const std::vector<EmbeddingRecord>& records);
std::vector<EmbeddingRecord> ReadEmbeddings(std::istream& is);
void SaveEmbeddings(const std::string& path, const std::vector<EmbeddingRecord>& records);
std::vector<EmbeddingRecord> LoadEmbeddings(const std::string& path);

// Duplicate ids are a kDataError.
EmbeddingStore ToEmbeddingStore(const std::vector<EmbeddingRecord>& records);

}  // namespace vemb

#endif  // VEMB_EMBEDDING_IO_H_
