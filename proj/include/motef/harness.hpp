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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "motef/algorithms.hpp"
#include "motef/compressors.hpp"
#include "motef/config.hpp"
#include "motef/problems.hpp"
#include "motef/topology.hpp"

namespace motef {

// Environment variable that, when set, redirects every output file into its
// directory (keeping the file name).
inline constexpr const char* kOutputDirEnv = "MOTEF_OUTPUT_DIR";

inline constexpr const char* kCsvHeader = "t,bits_cum,grad_norm_sq,consensus,loss,subopt,test_acc";

// Shortest decimal that reads back to the same double.
std::string format_number(double value);

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

// Mean of grad_norm_sq (or subopt) over the final 10% of records, at least one.
double steady_state(const std::vector<MetricsRecord>& records);
std::optional<double> steady_state_subopt(const std::vector<MetricsRecord>& records);

std::unique_ptr<Problem> build_problem(const ExperimentConfig& config);
Topology build_topology(const ExperimentConfig& config);
Eigen::VectorXd initial_point(const ExperimentConfig& config, std::size_t d);

// `output` with its directory replaced by $MOTEF_OUTPUT_DIR when set.
std::filesystem::path resolve_output(const std::filesystem::path& output);

struct RunResult {
  std::vector<MetricsRecord> records;
  std::filesystem::path csv;  // empty when nothing was written
  double steady_grad_norm_sq = 0.0;
  std::optional<double> steady_subopt;
};

/// Builds every component, runs, and writes the CSV unless `write` is false.
RunResult run_experiment(const ExperimentConfig& config, bool write = true);

struct SweepEntry {
  std::string value;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double steady_grad_norm_sq = 0.0;
  std::optional<double> steady_subopt;
  std::size_t records = 0;
  std::filesystem::path csv;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepEntry> entries;
  std::filesystem::path summary;  // empty when nothing was written
};

// n, lambda_momentum, zeta, sigma, gamma, eta, topology, compressor, algorithm.
bool is_sweep_axis(std::string_view key);

/// Runs the base config once per value with seed = base seed XOR index. A run
/// that fails is recorded and the rest continue. With `parallel`, runs execute
/// on a thread pool; results do not depend on scheduling.
SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<std::string>& values, bool parallel, bool write = true);

void write_sweep_summary(std::ostream& out, const SweepResult& result);

// Splits "a,b,c" and trims each item; empty items are dropped.
std::vector<std::string> split_list(std::string_view text);

}  // namespace motef
