// Copyright 2026 The Factor Atlas Authors.
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

#include "factor_atlas/error.hpp"

namespace factor_atlas {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kDuplicateEdge: return "duplicate edge";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kEmptyCorpus: return "empty corpus";
    case ErrorKind::kEmptySelection: return "empty selection";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kNumerical: return "numerical error";
    case ErrorKind::kIllConditioned: return "ill-conditioned";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical:
    case ErrorKind::kIllConditioned:
      return 4;
    default:
      return 3;
  }
}

}  // namespace factor_atlas
