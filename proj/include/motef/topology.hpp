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
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace motef {

enum class GraphKind { kComplete, kRing, kStar, kGrid, kErdosRenyi, kRandomRegular };

enum class Weighting { kMetropolis, kMetropolisLazy };

GraphKind parse_graph_kind(std::string_view text);
std::string to_string(GraphKind kind);
std::string to_string(Weighting weighting);

// Family parameters; each family reads only the fields it needs.
struct GraphParams {
  double p = 0.5;           // erdos_renyi edge probability
  std::size_t degree = 3;   // random_regular degree
  std::size_t rows = 0;     // grid shape; 0 means "derive from a square n"
  std::size_t cols = 0;
  bool lazy = false;        // W <- (W + I) / 2
};

/// Undirected communication graph together with its mixing matrix.
///
/// Immutable after construction. W is symmetric and doubly stochastic, is
/// supported on edges plus the diagonal, and has spectral gap rho().
class Topology {
 public:
  using Neighbors = std::vector<std::vector<std::size_t>>;

  /// Builds W with Metropolis-Hastings weights from an edge list. Edges are
  /// unordered pairs without self-loops; duplicates are rejected.
  static Topology from_edges(GraphKind kind, std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             Weighting weighting);

  std::size_t n() const noexcept { return neighbors_.size(); }
  GraphKind kind() const noexcept { return kind_; }
  Weighting weighting() const noexcept { return weighting_; }
  const Neighbors& neighbors() const noexcept { return neighbors_; }
  bool is_edge(std::size_t i, std::size_t j) const;
  std::size_t degree(std::size_t i) const { return neighbors_.at(i).size(); }
  std::size_t edge_count() const noexcept;

  const Eigen::MatrixXd& W() const noexcept { return w_; }
  // Same matrix in compressed form, used for gossip products X * W.
  const Eigen::SparseMatrix<double>& W_sparse() const noexcept { return w_sparse_; }
  double rho() const noexcept { return rho_; }

 private:
  Topology() = default;

  GraphKind kind_ = GraphKind::kComplete;
  Weighting weighting_ = Weighting::kMetropolis;
  Neighbors neighbors_;
  Eigen::MatrixXd w_;
  Eigen::SparseMatrix<double> w_sparse_;
  double rho_ = 0.0;
};

/// Deterministic in (kind, n, params, seed). Random families are resampled with
/// derived seeds until connected, up to kMaxConstructionRetries attempts.
Topology build_topology(GraphKind kind, std::size_t n, const GraphParams& params,
                        std::uint64_t seed);

inline constexpr int kMaxConstructionRetries = 100;

// 1 - max |eigenvalue| of W - (1/n) 11^T. Zero when W does not mix.
double spectral_gap(const Eigen::MatrixXd& W);

struct MixingReport {
  double symmetry_defect = 0.0;   // max |W_ij - W_ji|
  double row_sum_defect = 0.0;    // max |sum_j W_ij - 1|
  double col_sum_defect = 0.0;    // max |sum_i W_ij - 1|
  double rho = 0.0;
  double sigma_max_sq = 0.0;      // sigma_max(W - I)^2
  bool pass = false;
};

MixingReport validate_mixing(const Eigen::MatrixXd& W);

// sigma_max(W - I)^2 for a square matrix.
double sigma_max_sq_w_minus_i(const Eigen::MatrixXd& W);

bool is_connected(const Topology::Neighbors& neighbors);

// Row-major CSV, 17 significant digits.
void write_mixing_csv(std::ostream& out, const Eigen::MatrixXd& W);

}  // namespace motef
