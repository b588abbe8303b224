// Copyright 2026 The lanewarp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lanewarp/error.hpp"

namespace lanewarp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kDegenerate: return "degenerate-correspondence";
    case ErrorKind::kPointAtInfinity: return "point-at-infinity";
    case ErrorKind::kNoContext: return "no-context";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kBackend: return "backend";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace lanewarp
