// Copyright 2026 The cpsmc Authors.
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

#ifndef CPSMC_ERRORS_HPP
#define CPSMC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpsmc {

/// Raised when every importance weight is zero (or -inf in log space).
class DegenerateWeightsError : public std::runtime_error {
 public:
  DegenerateWeightsError() : std::runtime_error("degenerate weights: no particle carries positive weight") {}
  explicit DegenerateWeightsError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a changepoint configuration breaks ordering or model constraints.
class InvalidConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed input files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_{line} {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cpsmc

#endif
