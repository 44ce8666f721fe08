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

#ifndef VEMB_NN_CHECKPOINT_H_
#define VEMB_NN_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vemb/nn/layers.h"
#include "vemb/nn/tensor.h"

namespace vemb::nn {

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2, kUInt8 = 3 };

struct CheckpointEntry {
  DType dtype = DType::kFloat32;
  Shape dims;
  std::vector<std::uint8_t> bytes;  // little-endian payload
};

// Binary parameter container:
//   "VEMB" | version u32 | count u32 |
//   count x (name_len u16 | name | dtype u8 | rank u8 | dims u64[rank] | data)
// Entries are written sorted by name. Reading rejects a bad magic, an
// unknown version, truncation, and trailing bytes.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr char kManifestKey[] = "__manifest__";

  template <typename T>
  void PutTensor(const std::string& name, const Tensor<T>& tensor);
  void PutText(const std::string& name, const std::string& text);

  bool Has(const std::string& name) const { return entries_.count(name) != 0; }
  // Converts between float widths as needed.
  template <typename T>
  Tensor<T> GetTensor(const std::string& name) const;
  std::string GetText(const std::string& name) const;

  template <typename T>
  void PutParameters(const ParameterSet<T>& params);
  // Every parameter must be present with an identical shape.
  template <typename T>
  void LoadParameters(ParameterSet<T>& params) const;

  const std::map<std::string, CheckpointEntry>& entries() const {
    return entries_;
  }

  void Write(std::ostream& os) const;
  static Checkpoint Read(std::istream& is);
  void Save(const std::string& path) const;
  static Checkpoint Load(const std::string& path);

 private:
  const CheckpointEntry& Find(const std::string& name) const;

  std::map<std::string, CheckpointEntry> entries_;
};

}  // namespace vemb::nn

#endif  // VEMB_NN_CHECKPOINT_H_
