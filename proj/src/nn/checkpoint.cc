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

#include "vemb/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>

#include "vemb/error.h"

namespace vemb::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'E', 'M', 'B'};

std::size_t DTypeSize(DType t) {
  switch (t) {
    case DType::kFloat32: return 4;
    case DType::kFloat64: return 8;
    case DType::kUInt8: return 1;
  }
  Fail(ErrorCode::kCorrupt, "unknown dtype tag");
}

template <typename T>
DType DTypeOf();
template <>
DType DTypeOf<float>() { return DType::kFloat32; }
template <>
DType DTypeOf<double>() { return DType::kFloat64; }

template <typename U>
void WritePod(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  void Bytes(void* dst, std::size_t n, const char* what) {
    is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    Check(static_cast<std::size_t>(is_.gcount()) == n, ErrorCode::kTruncated,
          std::string("checkpoint truncated while reading ") + what);
  }
  template <typename U>
  U Pod(const char* what) {
    U v;
    Bytes(&v, sizeof(U), what);
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace

template <typename T>
void Checkpoint::PutTensor(const std::string& name, const Tensor<T>& tensor) {
  CheckpointEntry e;
  e.dtype = DTypeOf<T>();
  e.dims = tensor.shape();
  e.bytes.resize(tensor.numel() * sizeof(T));
  std::memcpy(e.bytes.data(), tensor.data().data(), e.bytes.size());
  entries_[name] = std::move(e);
}

void Checkpoint::PutText(const std::string& name, const std::string& text) {
  CheckpointEntry e;
  e.dtype = DType::kUInt8;
  e.dims = {text.size()};
  e.bytes.assign(text.begin(), text.end());
  entries_[name] = std::move(e);
}

const CheckpointEntry& Checkpoint::Find(const std::string& name) const {
  auto it = entries_.find(name);
  Check(it != entries_.end(), ErrorCode::kDataError,
        "checkpoint has no entry '" + name + "'");
  return it->second;
}

template <typename T>
Tensor<T> Checkpoint::GetTensor(const std::string& name) const {
  const CheckpointEntry& e = Find(name);
  const std::size_t n = NumElements(e.dims);
  std::vector<T> data(n);
  if (e.dtype == DType::kFloat32) {
    std::vector<float> raw(n);
    std::memcpy(raw.data(), e.bytes.data(), n * sizeof(float));
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<T>(raw[i]);
  } else if (e.dtype == DType::kFloat64) {
    std::vector<double> raw(n);
    std::memcpy(raw.data(), e.bytes.data(), n * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<T>(raw[i]);
  } else {
    Fail(ErrorCode::kDataError, "entry '" + name + "' is not a float tensor");
  }
  return Tensor<T>::FromData(e.dims, std::move(data));
}

std::string Checkpoint::GetText(const std::string& name) const {
  const CheckpointEntry& e = Find(name);
  Check(e.dtype == DType::kUInt8, ErrorCode::kDataError,
        "entry '" + name + "' is not text");
  return std::string(e.bytes.begin(), e.bytes.end());
}

template <typename T>
void Checkpoint::PutParameters(const ParameterSet<T>& params) {
  for (const auto& [name, t] : params.entries()) PutTensor(name, t);
}

template <typename T>
void Checkpoint::LoadParameters(ParameterSet<T>& params) const {
  for (const auto& [name, t] : params.entries()) {
    Tensor<T> loaded = GetTensor<T>(name);
    Check(loaded.shape() == t.shape(), ErrorCode::kDataError,
          "parameter '" + name + "' has shape " +
              ShapeToString(loaded.shape()) + ", model expects " +
              ShapeToString(t.shape()));
    Tensor<T> dst = t;
    std::copy(loaded.data().begin(), loaded.data().end(), dst.data().begin());
  }
}

void Checkpoint::Write(std::ostream& os) const {
  Check(entries_.size() <= std::numeric_limits<std::uint32_t>::max(),
        ErrorCode::kInvalidArgument, "too many checkpoint entries");
  os.write(kMagic, 4);
  WritePod<std::uint32_t>(os, kVersion);
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
  // std::map iterates in name order.
  for (const auto& [name, e] : entries_) {
    Check(name.size() <= std::numeric_limits<std::uint16_t>::max(),
          ErrorCode::kInvalidArgument, "parameter name too long");
    Check(e.dims.size() <= 255, ErrorCode::kInvalidArgument, "rank > 255");
    WritePod<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    WritePod<std::uint8_t>(os, static_cast<std::uint8_t>(e.dtype));
    WritePod<std::uint8_t>(os, static_cast<std::uint8_t>(e.dims.size()));
    for (std::size_t d : e.dims) WritePod<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(e.bytes.data()),
             static_cast<std::streamsize>(e.bytes.size()));
  }
  Check(static_cast<bool>(os), ErrorCode::kUnreadableFile,
        "failed writing checkpoint");
}

Checkpoint Checkpoint::Read(std::istream& is) {
  Reader r(is);
  char magic[4];
  r.Bytes(magic, 4, "magic");
  Check(std::memcmp(magic, kMagic, 4) == 0, ErrorCode::kBadMagic,
        "not a checkpoint (bad magic)");
  const auto version = r.Pod<std::uint32_t>("version");
  Check(version == kVersion, ErrorCode::kUnsupportedVersion,
        "unsupported checkpoint version " + std::to_string(version));
  const auto count = r.Pod<std::uint32_t>("entry count");
  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.Pod<std::uint16_t>("name length");
    std::string name(name_len, '\0');
    r.Bytes(name.data(), name_len, "name");
    CheckpointEntry e;
    const auto tag = r.Pod<std::uint8_t>("dtype");
    Check(tag >= 1 && tag <= 3, ErrorCode::kCorrupt,
          "unknown dtype tag " + std::to_string(tag));
    e.dtype = static_cast<DType>(tag);
    const auto rank = r.Pod<std::uint8_t>("rank");
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      const auto dim = r.Pod<std::uint64_t>("dims");
      Check(dim < (1ull << 40), ErrorCode::kCorrupt, "implausible dimension");
      e.dims.push_back(static_cast<std::size_t>(dim));
      n *= dim;
    }
    Check(n < (1ull << 40), ErrorCode::kCorrupt, "implausible tensor size");
    e.bytes.resize(static_cast<std::size_t>(n) * DTypeSize(e.dtype));
    r.Bytes(e.bytes.data(), e.bytes.size(), "tensor data");
    Check(ck.entries_.emplace(std::move(name), std::move(e)).second,
          ErrorCode::kCorrupt, "duplicate entry name");
  }
  Check(is.peek() == std::char_traits<char>::eof(), ErrorCode::kCorrupt,
        "trailing bytes after the last checkpoint entry");
  return ck;
}

void Checkpoint::Save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  Check(static_cast<bool>(os), ErrorCode::kUnreadableFile,
        "cannot open '" + path + "' for writing");
  Write(os);
}

Checkpoint Checkpoint::Load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  Check(static_cast<bool>(is), ErrorCode::kUnreadableFile,
        "cannot open '" + path + "'");
  return Read(is);
}

template void Checkpoint::PutTensor<float>(const std::string&,
                                           const Tensor<float>&);
template void Checkpoint::PutTensor<double>(const std::string&,
                                            const Tensor<double>&);
template Tensor<float> Checkpoint::GetTensor<float>(const std::string&) const;
template Tensor<double> Checkpoint::GetTensor<double>(const std::string&) const;
template void Checkpoint::PutParameters<float>(const ParameterSet<float>&);
template void Checkpoint::PutParameters<double>(const ParameterSet<double>&);
template void Checkpoint::LoadParameters<float>(ParameterSet<float>&) const;
template void Checkpoint::LoadParameters<double>(ParameterSet<double>&) const;

}  // namespace vemb::nn
