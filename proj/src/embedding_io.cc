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

#include "vemb/embedding_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "vemb/error.h"

namespace vemb {

static_assert(std::endian::native == std::endian::little,
              "embedding I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'E', 'C', '1'};

template <typename U>
void WritePod(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

void ReadBytes(std::istream& is, void* dst, std::size_t n, const char* what) {
  is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  Check(static_cast<std::size_t>(is.gcount()) == n, ErrorCode::kTruncated,
        std::string("embedding file truncated in ") + what);
}

template <typename U>
U ReadPod(std::istream& is, const char* what) {
  U v;
  ReadBytes(is, &v, sizeof(U), what);
  return v;
}

}  // namespace

void WriteEmbeddings(std::ostream& os, const std::vector<EmbeddingRecord>& records) {
  Check(records.size() <= std::numeric_limits<std::uint32_t>::max(),
        ErrorCode::kInvalidArgument, "too many embeddings");
  const std::size_t dim = records.empty() ? 0 : records.front().values.size();
  os.write(kMagic, 4);
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(records.size()));
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(dim));
  for (const auto& r : records) {
    Check(r.values.size() == dim, ErrorCode::kShapeMismatch,
          "embedding '" + r.id + "' has a different dimension");
    Check(r.id.size() <= std::numeric_limits<std::uint16_t>::max(),
          ErrorCode::kInvalidArgument, "embedding id too long");
    WritePod<std::uint16_t>(os, static_cast<std::uint16_t>(r.id.size()));
    os.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
    os.write(reinterpret_cast<const char*>(r.values.data()),
             static_cast<std::streamsize>(dim * sizeof(float)));
  }
  Check(static_cast<bool>(os), ErrorCode::kUnreadableFile, "embedding write failed");
}

std::vector<EmbeddingRecord> ReadEmbeddings(std::istream& is) {
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() < 4) Fail(ErrorCode::kTruncated, "embedding file truncated in magic");
  Check(std::memcmp(magic, kMagic, 4) == 0, ErrorCode::kBadMagic,
        "not a VEC1 embedding file");
  const auto count = ReadPod<std::uint32_t>(is, "header");
  const auto dim = ReadPod<std::uint32_t>(is, "header");
  std::vector<EmbeddingRecord> out;
  out.reserve(std::min<std::uint32_t>(count, 1u << 16));
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord r;
    r.id.resize(ReadPod<std::uint16_t>(is, "id length"));
    ReadBytes(is, r.id.data(), r.id.size(), "id");
    r.values.resize(dim);
    ReadBytes(is, r.values.data(), dim * sizeof(float), "values");
    out.push_back(std::move(r));
  }
  Check(is.peek() == std::char_traits<char>::eof(), ErrorCode::kCorrupt,
        "trailing bytes after the last embedding");
  return out;
}

void SaveEmbeddings(const std::string& path, const std::vector<EmbeddingRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorCode::kUnreadableFile, "cannot write " + path);
  WriteEmbeddings(os, records);
}

std::vector<EmbeddingRecord> LoadEmbeddings(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorCode::kUnreadableFile, "cannot open " + path);
  return ReadEmbeddings(is);
}

EmbeddingStore ToEmbeddingStore(const std::vector<EmbeddingRecord>& records) {
  EmbeddingStore store;
  for (const auto& r : records) {
    auto [it, inserted] =
        store.emplace(r.id, std::vector<double>(r.values.begin(), r.values.end()));
    Check(inserted, ErrorCode::kDataError, "duplicate embedding id " + r.id);
  }
  return store;
}

}  // namespace vemb
