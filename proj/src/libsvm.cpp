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

#include "motef/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "motef/errors.hpp"
#include "motef/random.hpp"

namespace motef {
namespace {

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

int map_label(std::string_view token, std::size_t line) {
  double value = 0.0;
  if (!parse_double(token, value))
    throw ParseError(line, "malformed label '" + std::string(token) + "'");
  if (value == 1.0) return 1;
  if (value == -1.0 || value == 0.0 || value == 2.0) return -1;
  throw ParseError(line, "label '" + std::string(token) + "' is not binary");
}

}  // namespace

Eigen::VectorXd LibSVMDataset::dense(std::size_t row) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (auto [j, v] : rows.at(row).features) x(static_cast<Eigen::Index>(j)) = v;
  return x;
}

LibSVMDataset parse_libsvm(std::istream& in) {
  LibSVMDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;

    LibSVMDataset::Row row;
    row.label = map_label(token, line_no);
    std::size_t previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
        throw ParseError(line_no, "malformed feature '" + token + "'");
      std::size_t index = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + colon, index);
      if (ec != std::errc() || ptr != token.data() + colon || index == 0)
        throw ParseError(line_no, "malformed feature index in '" + token + "'");
      double value = 0.0;
      if (!parse_double(std::string_view(token).substr(colon + 1), value))
        throw ParseError(line_no, "malformed feature value in '" + token + "'");
      if (index <= previous)
        throw ParseError(line_no, "feature indices must be strictly increasing (" +
                                      std::to_string(index) + " after " +
                                      std::to_string(previous) + ")");
      previous = index;
      row.features.emplace_back(index - 1, value);
    }
    data.d = std::max(data.d, previous);
    data.rows.push_back(std::move(row));
  }
  if (data.rows.empty()) throw ParseError(0, "no samples in input");
  return data;
}

LibSVMDataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
  return parse_libsvm(in);
}

std::vector<LibSVMDataset> shard(const LibSVMDataset& data, std::size_t n, bool shuffle,
                                 std::uint64_t seed) {
  if (n == 0) throw ValidationError("shard: n must be positive");
  if (data.m() < n)
    throw ValidationError("shard: " + std::to_string(data.m()) + " rows cannot fill " +
                          std::to_string(n) + " shards");
  std::vector<std::size_t> order(data.m());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Purpose::kShuffle)));
    std::shuffle(order.begin(), order.end(), rng);
  }
  const std::size_t base = data.m() / n;
  std::vector<LibSVMDataset> shards(n);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t size = (s + 1 == n) ? data.m() - next : base;
    shards[s].d = data.d;
    shards[s].rows.reserve(size);
    for (std::size_t r = 0; r < size; ++r) shards[s].rows.push_back(data.rows[order[next++]]);
  }
  return shards;
}

}  // namespace motef
