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

#include "motef/algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <span>

#include "motef/errors.hpp"

namespace motef {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::span<double> view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_shapes(const AlgState& s, const Problem& problem, const Topology& topo) {
  if (topo.n() != problem.n())
    throw ValidationError("topology has " + std::to_string(topo.n()) + " nodes but problem has " +
                          std::to_string(problem.n()) + " clients");
  if (s.X.rows() != idx(problem.d()) || s.X.cols() != idx(problem.n()))
    throw ValidationError("state does not match problem dimensions");
}

void check_compressor(const CompressorSpec& compressor, const Problem& problem) {
  if (compressor.d != problem.d())
    throw ValidationError("compressor dimension " + std::to_string(compressor.d) +
                          " differs from problem dimension " + std::to_string(problem.d()));
}

// Y (W - I), the gossip increment.
Eigen::MatrixXd gossip(const Eigen::MatrixXd& Y, const Topology& topo) {
  Eigen::MatrixXd out = Y * topo.W_sparse();
  out -= Y;
  return out;
}

// mirror += C(target - mirror), column by column, on the given channel.
void compress_towards(Eigen::MatrixXd& mirror, const Eigen::MatrixXd& target,
                      const CompressorSpec& compressor, const RandomStreams& streams,
                      std::size_t round, Purpose channel) {
  Eigen::VectorXd diff(mirror.rows());
  Eigen::VectorXd q(mirror.rows());
  for (Index c = 0; c < mirror.cols(); ++c) {
    diff = target.col(c) - mirror.col(c);
    if (compressor.randomized()) {
      Rng rng = streams.stream(static_cast<std::uint64_t>(c), round, channel);
      compress_into(compressor, view(diff), view(q), rng);
    } else {
      thread_local Rng unused;
      compress_into(compressor, view(diff), view(q), unused);
    }
    mirror.col(c) += q;
  }
}

// Column c holds a stochastic gradient of f_c at X.col(c).
Eigen::MatrixXd stoch_grads(const Problem& problem, const Eigen::MatrixXd& X, std::size_t batch,
                            const RandomStreams& streams, std::size_t round, Purpose purpose) {
  Eigen::MatrixXd G(X.rows(), X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    Rng rng = streams.stream(static_cast<std::uint64_t>(c), round, purpose);
    problem.stoch_grad_into(static_cast<std::size_t>(c), X.col(c), batch, rng, G.col(c));
  }
  return G;
}

// Shared by MoTEF and MoTEF-VR; `momentum` computes M^{t+1} from X^t and X^{t+1}.
template <typename Momentum>
void tracked_step(AlgState& s, const Problem& problem, const Topology& topo,
                  const CompressorSpec& compressor, const HyperParams& hp,
                  const RandomStreams& streams, Momentum&& momentum) {
  check_shapes(s, problem, topo);
  check_compressor(compressor, problem);
  const std::size_t round = s.t + 1;

  Eigen::MatrixXd X_next = s.X + hp.gamma * gossip(s.H, topo) - hp.eta * s.V;
  compress_towards(s.H, X_next, compressor, streams, round, Purpose::kCompressH);

  Eigen::MatrixXd M_next = momentum(s.X, X_next, s.M, round);
  Eigen::MatrixXd V_next = s.V + hp.gamma * gossip(s.G, topo);
  V_next += M_next - s.M;
  compress_towards(s.G, V_next, compressor, streams, round, Purpose::kCompressG);

  s.X = std::move(X_next);
  s.M = std::move(M_next);
  s.V = std::move(V_next);
  s.t = round;
  s.bits_sent_per_node += bits_per_round(AlgorithmKind::kMotef, compressor, problem.d());
}

}  // namespace

AlgorithmKind parse_algorithm(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "motef") return AlgorithmKind::kMotef;
  if (lower == "motef_vr") return AlgorithmKind::kMotefVr;
  if (lower == "beer") return AlgorithmKind::kBeer;
  if (lower == "choco") return AlgorithmKind::kChoco;
  if (lower == "dsgd") return AlgorithmKind::kDsgd;
  if (lower == "d2") return AlgorithmKind::kD2;
  throw ValidationError("unknown algorithm '" + std::string(text) + "'");
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kMotef: return "motef";
    case AlgorithmKind::kMotefVr: return "motef_vr";
    case AlgorithmKind::kBeer: return "beer";
    case AlgorithmKind::kChoco: return "choco";
    case AlgorithmKind::kDsgd: return "dsgd";
    case AlgorithmKind::kD2: return "d2";
  }
  return "?";
}

void HyperParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must be in (0, 1]");
  if (!(eta > 0.0)) throw ValidationError("eta must be > 0");
  if (!(lambda_momentum > 0.0 && lambda_momentum <= 1.0))
    throw ValidationError("lambda_momentum must be in (0, 1]");
  if (batch == 0) throw ValidationError("batch must be >= 1");
  if (init_batch == 0) throw ValidationError("init_batch must be >= 1");
}

AlgState init_state(const Problem& problem, const Topology& topo, const HyperParams& hp,
                    const Eigen::VectorXd& x0, const RandomStreams& streams) {
  const Index d = idx(problem.d());
  const Index n = idx(problem.n());
  if (topo.n() != problem.n())
    throw ValidationError("topology has " + std::to_string(topo.n()) + " nodes but problem has " +
                          std::to_string(problem.n()) + " clients");
  if (x0.size() != 0 && x0.size() != d)
    throw ValidationError("x0 has length " + std::to_string(x0.size()) + ", expected " +
                          std::to_string(d));
  if (hp.batch == 0 || hp.init_batch == 0) throw ValidationError("batch sizes must be >= 1");

  AlgState s;
  const Eigen::VectorXd start = x0.size() == 0 ? Eigen::VectorXd::Zero(d) : x0;
  s.X = start.replicate(1, n);
  s.H = s.X;
  s.M = stoch_grads(problem, s.X, hp.batch * hp.init_batch, streams, 0, Purpose::kInit);
  s.V = s.M;
  s.G = s.M;
  s.X_prev = s.X;
  s.grad_prev = Eigen::MatrixXd::Zero(d, n);
  return s;
}

void motef_step(AlgState& s, const Problem& problem, const Topology& topo,
                const CompressorSpec& compressor, const HyperParams& hp,
                const RandomStreams& streams) {
  const double lambda = hp.lambda_momentum;
  tracked_step(s, problem, topo, compressor, hp, streams,
               [&](const Eigen::MatrixXd&, const Eigen::MatrixXd& X_next,
                   const Eigen::MatrixXd& M, std::size_t round) {
                 Eigen::MatrixXd g =
                     stoch_grads(problem, X_next, hp.batch, streams, round, Purpose::kMomentum);
                 return Eigen::MatrixXd((1.0 - lambda) * M + lambda * g);
               });
}

void motef_vr_step(AlgState& s, const Problem& problem, const Topology& topo,
                   const CompressorSpec& compressor, const HyperParams& hp,
                   const RandomStreams& streams) {
  if (!problem.supports_paired_samples())
    throw CapabilityError("motef_vr needs an oracle that evaluates one sample at two points");
  const double lambda = hp.lambda_momentum;
  tracked_step(s, problem, topo, compressor, hp, streams,
               [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_next,
                   const Eigen::MatrixXd& M, std::size_t round) {
                 Eigen::MatrixXd out(M.rows(), M.cols());
                 Eigen::VectorXd at_next(M.rows());
                 Eigen::VectorXd at_prev(M.rows());
                 for (Index c = 0; c < M.cols(); ++c) {
                   const auto client = static_cast<std::size_t>(c);
                   Rng rng = streams.stream(client, round, Purpose::kMomentum);
                   const SampleDraw sample = problem.draw_sample(client, hp.batch, rng);
                   problem.sampled_grad_into(client, X_next.col(c), sample, at_next);
                   problem.sampled_grad_into(client, X.col(c), sample, at_prev);
                   out.col(c) = at_next + (1.0 - lambda) * (M.col(c) - at_prev);
                 }
                 return out;
               });
}

void beer_step(AlgState& s, const Problem& problem, const Topology& topo,
               const CompressorSpec& compressor, const HyperParams& hp,
               const RandomStreams& streams) {
  HyperParams beer = hp;
  beer.lambda_momentum = 1.0;
  motef_step(s, problem, topo, compressor, beer, streams);
}

void choco_step(AlgState& s, const Problem& problem, const Topology& topo,
                const CompressorSpec& compressor, const HyperParams& hp,
                const RandomStreams& streams) {
  check_shapes(s, problem, topo);
  check_compressor(compressor, problem);
  const std::size_t round = s.t + 1;

  s.M = stoch_grads(problem, s.X, hp.batch, streams, round, Purpose::kGradient);
  Eigen::MatrixXd X_half = s.X - hp.eta * s.M;
  compress_towards(s.H, X_half, compressor, streams, round, Purpose::kCompressChoco);
  s.X = X_half + hp.gamma * gossip(s.H, topo);
  s.t = round;
  s.bits_sent_per_node += bits_per_round(AlgorithmKind::kChoco, compressor, problem.d());
}

void dsgd_step(AlgState& s, const Problem& problem, const Topology& topo,
               const CompressorSpec& compressor, const HyperParams& hp,
               const RandomStreams& streams) {
  check_shapes(s, problem, topo);
  const std::size_t round = s.t + 1;

  s.M = stoch_grads(problem, s.X, hp.batch, streams, round, Purpose::kGradient);
  Eigen::MatrixXd X_next = s.X * topo.W_sparse();
  X_next -= hp.eta * s.M;
  s.X_prev = std::move(s.X);
  s.X = std::move(X_next);
  s.t = round;
  s.bits_sent_per_node += bits_per_round(AlgorithmKind::kDsgd, compressor, problem.d());
}

void d2_step(AlgState& s, const Problem& problem, const Topology& topo,
             const CompressorSpec& compressor, const HyperParams& hp,
             const RandomStreams& streams) {
  check_shapes(s, problem, topo);
  const std::size_t round = s.t + 1;

  s.M = stoch_grads(problem, s.X, hp.batch, streams, round, Purpose::kGradient);
  Eigen::MatrixXd Y;
  if (s.t == 0)
    Y = s.X - hp.eta * s.M;
  else
    Y = 2.0 * s.X - s.X_prev - hp.eta * (s.M - s.grad_prev);
  Eigen::MatrixXd X_next = Y * topo.W_sparse();
  s.X_prev = std::move(s.X);
  s.X = std::move(X_next);
  s.grad_prev = s.M;
  s.t = round;
  s.bits_sent_per_node += bits_per_round(AlgorithmKind::kD2, compressor, problem.d());
}

void step(AlgorithmKind kind, AlgState& s, const Problem& problem, const Topology& topo,
          const CompressorSpec& compressor, const HyperParams& hp, const RandomStreams& streams) {
  switch (kind) {
    case AlgorithmKind::kMotef: return motef_step(s, problem, topo, compressor, hp, streams);
    case AlgorithmKind::kMotefVr: return motef_vr_step(s, problem, topo, compressor, hp, streams);
    case AlgorithmKind::kBeer: return beer_step(s, problem, topo, compressor, hp, streams);
    case AlgorithmKind::kChoco: return choco_step(s, problem, topo, compressor, hp, streams);
    case AlgorithmKind::kDsgd: return dsgd_step(s, problem, topo, compressor, hp, streams);
    case AlgorithmKind::kD2: return d2_step(s, problem, topo, compressor, hp, streams);
  }
}

std::uint64_t bits_per_round(AlgorithmKind kind, const CompressorSpec& compressor, std::size_t d) {
  switch (kind) {
    case AlgorithmKind::kMotef:
    case AlgorithmKind::kMotefVr:
    case AlgorithmKind::kBeer:
      return 2 * message_bits(compressor);
    case AlgorithmKind::kChoco:
      return message_bits(compressor);
    case AlgorithmKind::kDsgd:
    case AlgorithmKind::kD2:
      return message_bits(CompressorSpec::identity(d));
  }
  return 0;
}

MetricsRecord measure(const AlgState& s, const Problem& problem) {
  MetricsRecord r;
  r.t = s.t;
  r.bits_cum = s.bits_sent_per_node;
  const Eigen::VectorXd x_bar = s.x_bar();
  r.grad_norm_sq = problem.full_grad(x_bar).squaredNorm();
  r.consensus = (s.X.colwise() - x_bar).squaredNorm() / static_cast<double>(s.X.cols());
  r.loss = problem.loss(x_bar);
  r.subopt = problem.suboptimality(x_bar);
  r.test_acc = problem.test_accuracy(x_bar);
  return r;
}

std::vector<MetricsRecord> run(const Problem& problem, const Topology& topo,
                               const CompressorSpec& compressor, const HyperParams& hp,
                               const RunOptions& options) {
  hp.validate();
  if (options.eval_every == 0) throw ValidationError("eval_every must be >= 1");
  if (options.kind != AlgorithmKind::kDsgd && options.kind != AlgorithmKind::kD2)
    check_compressor(compressor, problem);
  if (options.kind == AlgorithmKind::kMotefVr && !problem.supports_paired_samples())
    throw CapabilityError("motef_vr needs an oracle that evaluates one sample at two points");

  const RandomStreams streams(options.seed);
  AlgState s = init_state(problem, topo, hp, options.x0, streams);
  if (options.on_round) options.on_round(s);

  std::vector<MetricsRecord> records;
  records.push_back(measure(s, problem));
  auto reached = [&] {
    return options.stop_grad_norm_sq && records.back().grad_norm_sq <= *options.stop_grad_norm_sq;
  };
  if (reached()) return records;

  for (std::size_t t = 1; t <= hp.iters; ++t) {
    step(options.kind, s, problem, topo, compressor, hp, streams);
    if (options.on_round) options.on_round(s);
    if (t % options.eval_every == 0 || t == hp.iters) {
      records.push_back(measure(s, problem));
      if (reached()) break;
    }
  }
  return records;
}

}  // namespace motef
