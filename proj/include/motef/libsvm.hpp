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
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace motef {

/// Binary-labelled sparse dataset in LibSVM layout.
///
/// Feature indices are 1-based in the file and stored 0-based here. Labels map
/// to {-1, +1}: 1 -> +1; -1, 0 and 2 -> -1. Any other label is rejected, so
/// multi-class files do not load.
struct LibSVMDataset {
  struct Row {
    int label = 1;
    std::vector<std::pair<std::size_t, double>> features;  // strictly increasing index
  };

  std::vector<Row> rows;
  std::size_t d = 0;  // largest feature index seen (1-based) == dense width

  std::size_t m() const noexcept { return rows.size(); }
  Eigen::VectorXd dense(std::size_t row) const;
};

/// Reads one sample per line: `<label> <idx>:<val> ...`; text after `#` is
/// ignored and blank lines are skipped. Throws ParseError with the offending
/// line on malformed tokens or non-increasing indices, and ParseError(0, ...)
/// for input without samples.
LibSVMDataset parse_libsvm(std::istream& in);
LibSVMDataset load_libsvm(const std::filesystem::path& path);

/// Splits into n contiguous shards of floor(m/n) rows, the remainder going to
/// the last shard. With `shuffle`, rows are permuted by `seed` first.
std::vector<LibSVMDataset> shard(const LibSVMDataset& data, std::size_t n, bool shuffle = false,
                                 std::uint64_t seed = 0);

}  // namespace motef
