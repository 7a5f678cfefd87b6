// Copyright 2026 The MoTEF Simulator Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace motef {

// Precondition or input-shape violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A random construction could not satisfy its invariants within the retry budget.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The oracle lacks an operation an algorithm needs (e.g. paired sampling).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Text input (LibSVM data, config files) that does not parse. Carries the
// 1-based line number; 0 means "whole input".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace motef
