// Copyright 2026 The FoveaParse Authors.
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

#ifndef FOVEA_ERROR_HPP_
#define FOVEA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fovea {

enum class ErrorCode {
  kIo,
  kMalformedHeader,
  kZeroDimension,
  kTruncated,
  kUnsupportedMaxval,
  kBadMagic,
  kBadRank,
  kNonFinite,
  kMalformed,
  kUnknownClass,
  kOutOfRange,
  kDimensionMismatch,
  kMissingAverageSize,
  kZeroArea,
  kInvalidArgument,
  kTooLarge,
  kClassifier,
};

std::string_view to_string(ErrorCode code);

/// Raised for any problem with input data or arguments. Carries a code so
/// callers (and tests) can tell failure kinds apart.
class DataError : public std::runtime_error {
 public:
  DataError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fovea

#endif  // FOVEA_ERROR_HPP_
