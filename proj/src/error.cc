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

#include "vemb/error.h"

namespace vemb {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kUnreadableFile: return "unreadable file";
    case ErrorCode::kUnsupportedCodec: return "unsupported codec";
    case ErrorCode::kEmptyAudio: return "empty audio";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kTruncated: return "truncated file";
    case ErrorCode::kCorrupt: return "corrupt file";
    case ErrorCode::kNumeric: return "numeric failure";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kDataError: return "data error";
  }
  return "unknown";
}

}  // namespace vemb
