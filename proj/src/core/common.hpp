// Copyright 2026 The semvqa Authors
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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace semvqa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numeric values mirror semvqa_status in the public C header.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kParse = 3,
  kIo = 4,
  kNumeric = 5,
  kInfeasible = 6,
  kOutOfRange = 7,
  kVocabMismatch = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, std::string_view what) {
  if (!cond) throw Error(code, std::string(what));
}

inline void require_shape(bool cond, std::string_view what) {
  if (!cond) throw Error(ErrorCode::kShapeMismatch, std::string(what));
}

}  // namespace semvqa
