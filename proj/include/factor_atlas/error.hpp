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

#ifndef FACTOR_ATLAS_ERROR_HPP_
#define FACTOR_ATLAS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace factor_atlas {

enum class ErrorKind {
  kParse,
  kDuplicateEdge,
  kDomain,
  kNotFound,
  kEmptyCorpus,
  kEmptySelection,
  kDegenerate,
  kNumerical,
  kIllConditioned,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this one exception type; the
// kind decides the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// 3 for data/domain problems, 4 for numerical ones.
int exit_code_for(ErrorKind kind);

}  // namespace factor_atlas

#endif  // FACTOR_ATLAS_ERROR_HPP_
