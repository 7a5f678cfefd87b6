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

#include "motef/topology.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include <Eigen/Eigenvalues>

#include "motef/errors.hpp"
#include "motef/random.hpp"

namespace motef {
namespace {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

constexpr double kSymmetryTolerance = 1e-10;
constexpr std::size_t kDenseEigenLimit = 2048;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

EdgeList ring_edges(std::size_t n) {
  EdgeList edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
  } else if (n >= 3) {
    for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  }
  return edges;
}

EdgeList complete_edges(std::size_t n) {
  EdgeList edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return edges;
}

EdgeList star_edges(std::size_t n) {
  EdgeList edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(0, i);
  return edges;
}

EdgeList grid_edges(std::size_t n, const GraphParams& params) {
  std::size_t rows = params.rows;
  std::size_t cols = params.cols;
  if (rows == 0 && cols == 0) {
    auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side != n)
      throw ValidationError("grid: n=" + std::to_string(n) +
                            " is not a perfect square and no rows x cols was given");
    rows = cols = side;
  }
  if (rows * cols != n)
    throw ValidationError("grid: rows x cols = " + std::to_string(rows) + " x " +
                          std::to_string(cols) + " does not equal n=" + std::to_string(n));
  EdgeList edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  return edges;
}

EdgeList erdos_renyi_edges(std::size_t n, double p, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EdgeList edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unit(rng) < p) edges.emplace_back(i, j);
  return edges;
}

// Stub pairing with local repair of unsuitable pairs; returns false when the
// leftover stubs cannot be completed into a simple graph.
bool try_random_regular(std::size_t n, std::size_t degree, Rng& rng, EdgeList& out) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> stubs;
  stubs.reserve(n * degree);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < degree; ++k) stubs.push_back(v);

  while (!stubs.empty()) {
    std::map<std::size_t, std::size_t> leftovers;
    std::shuffle(stubs.begin(), stubs.end(), rng);
    for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
      auto a = std::min(stubs[k], stubs[k + 1]);
      auto b = std::max(stubs[k], stubs[k + 1]);
      if (a != b && !edges.count({a, b})) {
        edges.insert({a, b});
      } else {
        ++leftovers[a];
        ++leftovers[b];
      }
    }
    if (leftovers.empty()) break;

    bool suitable = false;
    for (auto it = leftovers.begin(); it != leftovers.end() && !suitable; ++it)
      for (auto jt = std::next(it); jt != leftovers.end(); ++jt)
        if (!edges.count({it->first, jt->first})) {
          suitable = true;
          break;
        }
    if (!suitable) return false;

    stubs.clear();
    for (auto [node, count] : leftovers)
      for (std::size_t k = 0; k < count; ++k) stubs.push_back(node);
  }
  out.assign(edges.begin(), edges.end());
  return true;
}

Topology::Neighbors neighbors_of(std::size_t n, const EdgeList& edges) {
  Topology::Neighbors nb(n);
  for (auto [a, b] : edges) {
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  for (auto& list : nb) std::sort(list.begin(), list.end());
  return nb;
}

double deflated_power_iteration(const Eigen::MatrixXd& W) {
  const auto n = W.rows();
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  auto deflate = [n](Eigen::VectorXd& x) { x.array() -= x.sum() / static_cast<double>(n); };
  deflate(v);
  if (v.norm() == 0.0) return 0.0;
  v.normalize();
  double estimate = 0.0;
  // W^2 is positive semidefinite on the deflated subspace, so its Rayleigh
  // quotient converges monotonically to lambda_max^2 regardless of sign.
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::VectorXd w = W * (W * v);
    deflate(w);
    double next = v.dot(w);
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - estimate) <= 1e-10 * std::max(std::abs(next), 1e-300)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::sqrt(std::max(estimate, 0.0));
}

}  // namespace

GraphKind parse_graph_kind(std::string_view text) {
  const auto key = lower(text);
  if (key == "complete") return GraphKind::kComplete;
  if (key == "ring") return GraphKind::kRing;
  if (key == "star") return GraphKind::kStar;
  if (key == "grid") return GraphKind::kGrid;
  if (key == "erdos_renyi" || key == "er") return GraphKind::kErdosRenyi;
  if (key == "random_regular" || key == "regular") return GraphKind::kRandomRegular;
  throw ValidationError("unknown graph kind '" + std::string(text) + "'");
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kComplete: return "complete";
    case GraphKind::kRing: return "ring";
    case GraphKind::kStar: return "star";
    case GraphKind::kGrid: return "grid";
    case GraphKind::kErdosRenyi: return "erdos_renyi";
    case GraphKind::kRandomRegular: return "random_regular";
  }
  return "unknown";
}

std::string to_string(Weighting weighting) {
  return weighting == Weighting::kMetropolis ? "metropolis" : "metropolis_lazy";
}

Topology Topology::from_edges(GraphKind kind, std::size_t n, const EdgeList& edges,
                              Weighting weighting) {
  if (n == 0) throw ValidationError("topology needs n >= 1");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw ValidationError("edge endpoint out of range");
    if (a == b) throw ValidationError("self-loops are not edges");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      throw ValidationError("duplicate edge");
  }

  Topology topo;
  topo.kind_ = kind;
  topo.weighting_ = weighting;
  topo.neighbors_ = neighbors_of(n, edges);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (auto [a, b] : edges) {
    const double w =
        1.0 / (1.0 + static_cast<double>(std::max(topo.degree(a), topo.degree(b))));
    W(a, b) = w;
    W(b, a) = w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (auto j : topo.neighbors_[i]) off += W(i, j);
    W(i, i) = 1.0 - off;
  }
  if (weighting == Weighting::kMetropolisLazy) {
    W = 0.5 * W;
    W.diagonal().array() += 0.5;
  }
  topo.w_ = W;
  topo.w_sparse_ = W.sparseView();
  topo.rho_ = spectral_gap(W);
  return topo;
}

bool Topology::is_edge(std::size_t i, std::size_t j) const {
  const auto& list = neighbors_.at(i);
  return std::binary_search(list.begin(), list.end(), j);
}

std::size_t Topology::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& list : neighbors_) total += list.size();
  return total / 2;
}

bool is_connected(const Topology::Neighbors& neighbors) {
  if (neighbors.empty()) return false;
  std::vector<bool> seen(neighbors.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    auto v = frontier.front();
    frontier.pop();
    for (auto u : neighbors[v]) {
      if (!seen[u]) {
        seen[u] = true;
        ++reached;
        frontier.push(u);
      }
    }
  }
  return reached == neighbors.size();
}

Topology build_topology(GraphKind kind, std::size_t n, const GraphParams& params,
                        std::uint64_t seed) {
  if (n == 0) throw ValidationError("topology needs n >= 1");
  const auto weighting = params.lazy ? Weighting::kMetropolisLazy : Weighting::kMetropolis;

  switch (kind) {
    case GraphKind::kComplete:
      return Topology::from_edges(kind, n, complete_edges(n), weighting);
    case GraphKind::kRing:
      return Topology::from_edges(kind, n, ring_edges(n), weighting);
    case GraphKind::kStar:
      return Topology::from_edges(kind, n, star_edges(n), weighting);
    case GraphKind::kGrid:
      return Topology::from_edges(kind, n, grid_edges(n, params), weighting);
    case GraphKind::kErdosRenyi:
    case GraphKind::kRandomRegular:
      break;
  }

  if (kind == GraphKind::kErdosRenyi && !(params.p > 0.0 && params.p <= 1.0))
    throw ValidationError("erdos_renyi: p must lie in (0, 1]");
  if (kind == GraphKind::kRandomRegular) {
    if (params.degree == 0 || params.degree >= n || (params.degree * n) % 2 != 0)
      throw ValidationError("random_regular: need 1 <= degree < n and degree * n even");
  }

  for (int attempt = 0; attempt < kMaxConstructionRetries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Purpose::kTopology),
                        static_cast<std::uint64_t>(attempt)));
    EdgeList edges;
    if (kind == GraphKind::kErdosRenyi) {
      edges = erdos_renyi_edges(n, params.p, rng);
    } else if (!try_random_regular(n, params.degree, rng, edges)) {
      continue;
    }
    if (!is_connected(neighbors_of(n, edges))) continue;
    return Topology::from_edges(kind, n, edges, weighting);
  }
  throw ConstructionError(to_string(kind) + ": no connected graph after " +
                          std::to_string(kMaxConstructionRetries) + " attempts");
}

double spectral_gap(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols() || W.rows() == 0)
    throw ValidationError("spectral_gap: W must be square and non-empty");
  const double asym = (W - W.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance)
    throw ValidationError("spectral_gap: W is not symmetric (defect " + std::to_string(asym) + ")");

  const auto n = W.rows();
  double second = 0.0;
  if (static_cast<std::size_t>(n) <= kDenseEigenLimit) {
    Eigen::MatrixXd deflated = 0.5 * (W + W.transpose());
    deflated.array() -= 1.0 / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated, Eigen::EigenvaluesOnly);
    second = solver.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    second = deflated_power_iteration(W);
  }
  return std::clamp(1.0 - second, 0.0, 1.0);
}

double sigma_max_sq_w_minus_i(const Eigen::MatrixXd& W) {
  Eigen::MatrixXd D = W - Eigen::MatrixXd::Identity(W.rows(), W.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const double s = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return s * s;
}

MixingReport validate_mixing(const Eigen::MatrixXd& W) {
  MixingReport report;
  if (W.rows() != W.cols() || W.rows() == 0) return report;
  const auto n = W.rows();
  report.symmetry_defect = (W - W.transpose()).cwiseAbs().maxCoeff();
  report.row_sum_defect = (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
  report.col_sum_defect = (W.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (report.symmetry_defect <= kSymmetryTolerance) {
    report.rho = spectral_gap(W);
  } else {
    Eigen::MatrixXd deflated = W;
    deflated.array() -= 1.0 / static_cast<double>(n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(deflated, false);
    report.rho = std::clamp(1.0 - solver.eigenvalues().cwiseAbs().maxCoeff(), 0.0, 1.0);
  }
  report.sigma_max_sq = sigma_max_sq_w_minus_i(W);
  report.pass = report.symmetry_defect < 1e-10 && report.row_sum_defect < 1e-10 &&
                report.col_sum_defect < 1e-10 && report.rho > 1e-12;
  return report;
}

void write_mixing_csv(std::ostream& out, const Eigen::MatrixXd& W) {
  char buf[64];
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", W(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace motef
