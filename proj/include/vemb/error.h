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

#ifndef VEMB_ERROR_H_
#define VEMB_ERROR_H_

#include <stdexcept>
#include <string>

namespace vemb {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kUnreadableFile,
  kUnsupportedCodec,
  kEmptyAudio,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kCorrupt,
  kNumeric,
  kParse,
  kDataError,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported with this exception; `code()` tells the
// caller which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Check(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) Fail(code, what);
}

}  // namespace vemb

#endif  // VEMB_ERROR_H_
