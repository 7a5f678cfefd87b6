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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "motef/algorithms.hpp"
#include "motef/topology.hpp"

namespace motef {

enum class ProblemKind { kSynthetic, kLogReg };
enum class InitKind { kZeros, kOnes, kGaussian };

ProblemKind parse_problem_kind(std::string_view text);
std::string to_string(ProblemKind kind);
InitKind parse_init_kind(std::string_view text);
std::string to_string(InitKind kind);

/// One experiment. Relative data paths are resolved against the directory of
/// the config file when loaded with load_config.
struct ExperimentConfig {
  AlgorithmKind algorithm = AlgorithmKind::kMotef;
  ProblemKind problem = ProblemKind::kSynthetic;

  // synthetic
  std::size_t d = 20;
  double zeta = 0.0;
  double sigma = 0.0;

  // logreg
  std::filesystem::path data_path;
  std::filesystem::path test_path;
  double reg_lambda = 0.05;
  bool shuffle = false;

  GraphKind topology = GraphKind::kRing;
  std::size_t n = 0;
  GraphParams graph;

  std::string compressor = "identity";
  HyperParams hp;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;
  InitKind x0 = InitKind::kZeros;
  std::filesystem::path output = "run.csv";

  // Range checks on every field; throws ValidationError.
  void validate() const;
};

/// Sets one field from its text form, as read from a config line. Throws
/// ParseError (line 0) for unknown keys or unparsable values and
/// ValidationError for out-of-range values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);

bool is_config_key(std::string_view key);

/// Flat `key = value` lines; `#` starts a comment. Errors carry the line
/// number. Required keys: algorithm, problem, topology, n, eta, iters, plus d
/// (synthetic) or data_path (logreg).
ExperimentConfig parse_config(std::istream& in,
                              const std::filesystem::path& base_dir = std::filesystem::path());
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace motef
