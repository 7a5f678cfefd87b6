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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "motef/compressors.hpp"
#include "motef/problems.hpp"
#include "motef/random.hpp"
#include "motef/topology.hpp"

namespace motef {

enum class AlgorithmKind { kMotef, kMotefVr, kBeer, kChoco, kDsgd, kD2 };

// `motef`, `motef_vr`, `beer`, `choco`, `dsgd`, `d2`.
AlgorithmKind parse_algorithm(std::string_view text);
std::string to_string(AlgorithmKind kind);

struct HyperParams {
  double gamma = 0.1;            // gossip stepsize
  double eta = 1e-3;             // model stepsize
  double lambda_momentum = 0.1;  // momentum weight
  std::size_t batch = 1;
  std::size_t init_batch = 1;    // draws averaged into the initial gradient
  std::size_t iters = 0;

  // gamma in (0, 1], eta > 0, lambda in (0, 1], batch and init_batch >= 1.
  void validate() const;
};

/// Columns are clients. Choco keeps its public copies x_hat in H; Choco, DSGD
/// and D2 keep their latest stochastic gradient in M. D2 also keeps X and the
/// gradient of the previous round.
struct AlgState {
  Eigen::MatrixXd X, H, G, V, M;
  Eigen::MatrixXd X_prev, grad_prev;
  std::size_t t = 0;
  std::uint64_t bits_sent_per_node = 0;

  Eigen::VectorXd x_bar() const { return X.rowwise().mean(); }
  Eigen::VectorXd v_bar() const { return V.rowwise().mean(); }
  Eigen::VectorXd m_bar() const { return M.rowwise().mean(); }
};

/// X = H = x0 1^T and M = V = G = stochastic gradients at X, each client
/// averaging init_batch draws. An empty x0 means the zero vector.
AlgState init_state(const Problem& problem, const Topology& topo, const HyperParams& hp,
                    const Eigen::VectorXd& x0, const RandomStreams& streams);

// One synchronous round. Every client reads the round-t state and writes its
// own column of round t+1; client c's draws come from stream (c, t+1, purpose).
void motef_step(AlgState& s, const Problem& problem, const Topology& topo,
                const CompressorSpec& compressor, const HyperParams& hp,
                const RandomStreams& streams);
// Throws CapabilityError when the oracle cannot evaluate one sample at two points.
void motef_vr_step(AlgState& s, const Problem& problem, const Topology& topo,
                   const CompressorSpec& compressor, const HyperParams& hp,
                   const RandomStreams& streams);
void beer_step(AlgState& s, const Problem& problem, const Topology& topo,
               const CompressorSpec& compressor, const HyperParams& hp,
               const RandomStreams& streams);
void choco_step(AlgState& s, const Problem& problem, const Topology& topo,
                const CompressorSpec& compressor, const HyperParams& hp,
                const RandomStreams& streams);
// Uncompressed; the compressor argument is ignored.
void dsgd_step(AlgState& s, const Problem& problem, const Topology& topo,
               const CompressorSpec& compressor, const HyperParams& hp,
               const RandomStreams& streams);
void d2_step(AlgState& s, const Problem& problem, const Topology& topo,
             const CompressorSpec& compressor, const HyperParams& hp,
             const RandomStreams& streams);

void step(AlgorithmKind kind, AlgState& s, const Problem& problem, const Topology& topo,
          const CompressorSpec& compressor, const HyperParams& hp, const RandomStreams& streams);

// Compressed messages each node sends per round.
std::uint64_t bits_per_round(AlgorithmKind kind, const CompressorSpec& compressor, std::size_t d);

struct MetricsRecord {
  std::size_t t = 0;
  std::uint64_t bits_cum = 0;   // per node
  double grad_norm_sq = 0.0;    // ||grad f(x_bar)||^2, exact gradient
  double consensus = 0.0;       // ||X - x_bar 1^T||_F^2 / n
  double loss = 0.0;            // f(x_bar)
  std::optional<double> subopt;
  std::optional<double> test_acc;
};

MetricsRecord measure(const AlgState& s, const Problem& problem);

struct RunOptions {
  AlgorithmKind kind = AlgorithmKind::kMotef;
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;
  Eigen::VectorXd x0;  // empty means zero
  // Called after init and after every round.
  std::function<void(const AlgState&)> on_round;
  // Stops early once a recorded grad_norm_sq is at or below this value.
  std::optional<double> stop_grad_norm_sq;
};

/// Runs hp.iters rounds, recording at t = 0, every eval_every rounds, and at
/// the last round. Deterministic in (inputs, seed).
std::vector<MetricsRecord> run(const Problem& problem, const Topology& topo,
                               const CompressorSpec& compressor, const HyperParams& hp,
                               const RunOptions& options);

}  // namespace motef
