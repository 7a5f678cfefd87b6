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

#include <cmath>

#include <gtest/gtest.h>

#include "motef/errors.hpp"

namespace motef {
namespace {

// Oracle without paired sampling, to exercise the capability check.
class UnpairedProblem final : public Problem {
 public:
  explicit UnpairedProblem(const SyntheticLeastSquares& inner) : inner_(inner) {}
  std::size_t n() const noexcept override { return inner_.n(); }
  std::size_t d() const noexcept override { return inner_.d(); }
  void exact_grad_into(std::size_t c, const VectorRef& x,
                       Eigen::Ref<Eigen::VectorXd> out) const override {
    inner_.exact_grad_into(c, x, out);
  }
  double local_loss(std::size_t c, const VectorRef& x) const override {
    return inner_.local_loss(c, x);
  }
  SampleDraw draw_sample(std::size_t c, std::size_t batch, Rng& rng) const override {
    return inner_.draw_sample(c, batch, rng);
  }
  void sampled_grad_into(std::size_t c, const VectorRef& x, const SampleDraw& s,
                         Eigen::Ref<Eigen::VectorXd> out) const override {
    inner_.sampled_grad_into(c, x, s, out);
  }
  bool supports_paired_samples() const noexcept override { return false; }
  double smoothness() const noexcept override { return inner_.smoothness(); }

 private:
  const SyntheticLeastSquares& inner_;
};

HyperParams params(double gamma, double eta, double lambda) {
  HyperParams hp;
  hp.gamma = gamma;
  hp.eta = eta;
  hp.lambda_momentum = lambda;
  return hp;
}

Eigen::VectorXd ones(std::size_t d) { return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)); }

TEST(ParseAlgorithm, KnownNames) {
  EXPECT_EQ(parse_algorithm("motef"), AlgorithmKind::kMotef);
  EXPECT_EQ(parse_algorithm("motef_vr"), AlgorithmKind::kMotefVr);
  EXPECT_EQ(parse_algorithm("BEER"), AlgorithmKind::kBeer);
  EXPECT_EQ(parse_algorithm("choco"), AlgorithmKind::kChoco);
  EXPECT_EQ(parse_algorithm("dsgd"), AlgorithmKind::kDsgd);
  EXPECT_EQ(parse_algorithm("d2"), AlgorithmKind::kD2);
  EXPECT_THROW(parse_algorithm("adam"), ValidationError);
  for (auto k : {AlgorithmKind::kMotef, AlgorithmKind::kMotefVr, AlgorithmKind::kBeer,
                 AlgorithmKind::kChoco, AlgorithmKind::kDsgd, AlgorithmKind::kD2})
    EXPECT_EQ(parse_algorithm(to_string(k)), k);
}

TEST(HyperParams, Validation) {
  EXPECT_NO_THROW(params(1.0, 0.1, 1.0).validate());
  EXPECT_THROW(params(0.0, 0.1, 0.5).validate(), ValidationError);
  EXPECT_THROW(params(1.5, 0.1, 0.5).validate(), ValidationError);
  EXPECT_THROW(params(0.5, -0.1, 0.5).validate(), ValidationError);
  EXPECT_THROW(params(0.5, 0.1, 0.0).validate(), ValidationError);
  EXPECT_THROW(params(0.5, 0.1, 1.5).validate(), ValidationError);
  HyperParams hp = params(0.5, 0.1, 0.5);
  hp.batch = 0;
  EXPECT_THROW(hp.validate(), ValidationError);
}

TEST(InitState, NoiselessGradientsAndConsensus) {
  const SyntheticLeastSquares p(4, 3, 2.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  const AlgState s = init_state(p, topo, params(0.5, 0.1, 0.5), ones(3), RandomStreams(1));
  EXPECT_EQ(s.M, p.exact_grad_matrix(s.X));
  EXPECT_EQ(s.V, s.M);
  EXPECT_EQ(s.G, s.M);
  EXPECT_EQ(s.H, s.X);
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(s.X.col(c), ones(3));
  EXPECT_EQ(s.bits_sent_per_node, 0u);
  EXPECT_EQ(s.t, 0u);
}

TEST(InitState, LargeInitialBatchShrinksNoise) {
  const std::size_t n = 64, d = 20;
  const SyntheticLeastSquares p(n, d, 0.0, 10.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, n, {}, 0);
  HyperParams hp = params(0.5, 0.1, 0.5);
  hp.init_batch = 10000;
  const AlgState s = init_state(p, topo, hp, ones(d), RandomStreams(5));
  const double mean = (s.M - p.exact_grad_matrix(s.X)).squaredNorm() / static_cast<double>(n);
  const double expected = 100.0 / 10000.0;
  const double se = expected * std::sqrt(2.0 / static_cast<double>(d * n));
  EXPECT_NEAR(mean, expected, 3 * se);
}

TEST(InitState, RejectsMismatchedShapes) {
  const SyntheticLeastSquares p(4, 3, 0.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 5, {}, 0);
  EXPECT_THROW(init_state(p, topo, params(0.5, 0.1, 0.5), ones(3), RandomStreams(1)),
               ValidationError);
  const Topology ok = build_topology(GraphKind::kRing, 4, {}, 0);
  EXPECT_THROW(init_state(p, ok, params(0.5, 0.1, 0.5), ones(2), RandomStreams(1)),
               ValidationError);
}

TEST(MotefStep, HandEvaluatedTwoClientStep) {
  Eigen::MatrixXd b(1, 2);
  b << 1.0, -2.0;
  const SyntheticLeastSquares p(b, 0.0, 0.0);
  const Topology topo = build_topology(GraphKind::kRing, 2, {}, 0);
  const CompressorSpec id = CompressorSpec::identity(1);
  const HyperParams hp = params(0.5, 0.1, 0.25);

  AlgState s;
  s.X.resize(1, 2);
  s.X << 1.0, 3.0;
  s.H.resize(1, 2);
  s.H << 0.5, 2.0;
  s.V.resize(1, 2);
  s.V << 0.2, -0.4;
  s.M.resize(1, 2);
  s.M << 0.3, -0.5;
  s.G.resize(1, 2);
  s.G << 0.1, 0.0;
  const AlgState before = s;
  motef_step(s, p, topo, id, hp, RandomStreams(0));

  // W = [[1/2, 1/2], [1/2, 1/2]], so H (W - I) = [(h2 - h1)/2, (h1 - h2)/2].
  const double x1 = 1.0 + 0.5 * 0.75 - 0.1 * 0.2;
  const double x2 = 3.0 - 0.5 * 0.75 + 0.1 * 0.4;
  EXPECT_DOUBLE_EQ(s.X(0, 0), x1);
  EXPECT_DOUBLE_EQ(s.X(0, 1), x2);
  EXPECT_DOUBLE_EQ(s.H(0, 0), x1);
  EXPECT_DOUBLE_EQ(s.H(0, 1), x2);
  // a_1 = 1/sqrt(2), a_2 = 2/sqrt(2): grad_i(x) = a_i^2 x - a_i b_i.
  const double g1 = 0.5 * x1 - (1 / std::sqrt(2.0)) * 1.0;
  const double g2 = 2.0 * x2 - (2 / std::sqrt(2.0)) * -2.0;
  const double m1 = 0.75 * 0.3 + 0.25 * g1;
  const double m2 = 0.75 * -0.5 + 0.25 * g2;
  EXPECT_NEAR(s.M(0, 0), m1, 1e-15);
  EXPECT_NEAR(s.M(0, 1), m2, 1e-15);
  const double v1 = 0.2 + 0.5 * (-0.05) + m1 - 0.3;
  const double v2 = -0.4 + 0.5 * 0.05 + m2 + 0.5;
  EXPECT_NEAR(s.V(0, 0), v1, 1e-15);
  EXPECT_NEAR(s.V(0, 1), v2, 1e-15);
  EXPECT_NEAR(s.G(0, 0), v1, 1e-15);
  EXPECT_NEAR(s.G(0, 1), v2, 1e-15);
  EXPECT_NEAR(s.x_bar()(0), before.x_bar()(0) - 0.05 * (0.3 - 0.5), 1e-15);
  EXPECT_EQ(s.t, 1u);
  EXPECT_EQ(s.bits_sent_per_node, 64u);
}

TEST(MotefStep, SingleClientIsMomentumGradientDescent) {
  const SyntheticLeastSquares p(1, 3, 4.0, 0.0, 2);
  const Topology topo = build_topology(GraphKind::kComplete, 1, {}, 0);
  const HyperParams hp = params(1.0, 0.3, 0.2);
  const RandomStreams streams(0);
  AlgState s = init_state(p, topo, hp, ones(3), streams);

  Eigen::VectorXd x = ones(3);
  Eigen::VectorXd m = p.exact_grad(0, x);
  for (int t = 0; t < 30; ++t) {
    motef_step(s, p, topo, CompressorSpec::identity(3), hp, streams);
    x -= hp.eta * m;
    m = (1 - hp.lambda_momentum) * m + hp.lambda_momentum * p.exact_grad(0, x);
    EXPECT_LT((s.X.col(0) - x).norm(), 1e-12);
    EXPECT_LT((s.M.col(0) - m).norm(), 1e-12);
  }
}

TEST(BeerStep, EqualsMotefWithUnitMomentum) {
  const SyntheticLeastSquares p(6, 10, 5.0, 3.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 6, {}, 0);
  const CompressorSpec c = CompressorSpec::rand_k(3, 10);
  const RandomStreams streams(4);
  HyperParams hp = params(0.2, 0.02, 1.0);
  AlgState a = init_state(p, topo, hp, ones(10), streams);
  AlgState b = a;
  for (int t = 0; t < 50; ++t) {
    motef_step(a, p, topo, c, hp, streams);
    beer_step(b, p, topo, c, params(0.2, 0.02, 0.3), streams);
    ASSERT_EQ(a.X, b.X);
    ASSERT_EQ(a.V, b.V);
  }
}

TEST(MotefVrStep, UnitMomentumMatchesMotef) {
  const SyntheticLeastSquares p(5, 8, 5.0, 3.0, 1);
  const Topology topo = build_topology(GraphKind::kStar, 5, {}, 0);
  const CompressorSpec c = CompressorSpec::top_k(2, 8);
  const RandomStreams streams(8);
  const HyperParams hp = params(0.3, 0.01, 1.0);
  AlgState a = init_state(p, topo, hp, ones(8), streams);
  AlgState b = a;
  for (int t = 0; t < 30; ++t) {
    motef_step(a, p, topo, c, hp, streams);
    motef_vr_step(b, p, topo, c, hp, streams);
    ASSERT_LT((a.X - b.X).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_LT((a.M - b.M).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MotefVrStep, NoiselessMomentumFormula) {
  const SyntheticLeastSquares p(2, 3, 3.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 2, {}, 0);
  const HyperParams hp = params(0.5, 0.05, 0.3);
  const RandomStreams streams(0);
  AlgState s = init_state(p, topo, hp, ones(3), streams);
  s.M.setConstant(0.7);
  s.V = s.M;
  s.G = s.M;
  const Eigen::MatrixXd X = s.X, M = s.M;
  motef_vr_step(s, p, topo, CompressorSpec::identity(3), hp, streams);
  const Eigen::MatrixXd expected =
      p.exact_grad_matrix(s.X) + (1 - hp.lambda_momentum) * (M - p.exact_grad_matrix(X));
  EXPECT_LT((s.M - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MotefVrStep, PairedEstimatorIsConditionallyUnbiased) {
  const SyntheticLeastSquares p(2, 2, 3.0, 4.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 2, {}, 0);
  const HyperParams hp = params(0.5, 0.05, 0.3);
  AlgState start = init_state(p, topo, hp, ones(2), RandomStreams(0));
  start.M.setConstant(0.7);
  start.V = start.M;
  start.G = start.M;

  const int draws = 10000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd X_next;
  for (int k = 0; k < draws; ++k) {
    AlgState s = start;
    motef_vr_step(s, p, topo, CompressorSpec::identity(2), hp, RandomStreams(1000 + k));
    sum += s.M;
    X_next = s.X;
  }
  const Eigen::MatrixXd expected = p.exact_grad_matrix(X_next) +
                                   (1 - hp.lambda_momentum) * (start.M - p.exact_grad_matrix(start.X));
  // Only the lambda-weighted fresh noise survives: per-coordinate sd = lambda * sigma / sqrt(d).
  const double se = hp.lambda_momentum * 4.0 / std::sqrt(2.0) / std::sqrt(double(draws));
  EXPECT_LT(((sum / draws) - expected).cwiseAbs().maxCoeff(), 4 * se);
}

TEST(MotefVrStep, RequiresPairedSampling) {
  const SyntheticLeastSquares inner(2, 2, 1.0, 1.0, 1);
  const UnpairedProblem p(inner);
  const Topology topo = build_topology(GraphKind::kRing, 2, {}, 0);
  const HyperParams hp = params(0.5, 0.05, 0.3);
  AlgState s = init_state(p, topo, hp, ones(2), RandomStreams(0));
  EXPECT_THROW(motef_vr_step(s, p, topo, CompressorSpec::identity(2), hp, RandomStreams(0)),
               CapabilityError);
  RunOptions options;
  options.kind = AlgorithmKind::kMotefVr;
  EXPECT_THROW(run(p, topo, CompressorSpec::identity(2), hp, options), CapabilityError);
}

TEST(ChocoStep, IdentityCompressorIsPlainGossip) {
  const SyntheticLeastSquares p(5, 4, 3.0, 2.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 5, {}, 0);
  const HyperParams hp = params(1.0, 0.1, 0.5);
  const RandomStreams streams(3);
  AlgState s = init_state(p, topo, hp, ones(4), streams);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd X = s.X;
    choco_step(s, p, topo, CompressorSpec::identity(4), hp, streams);
    const Eigen::MatrixXd expected = (X - hp.eta * s.M) * topo.W();
    EXPECT_LT((s.X - expected).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_EQ(s.bits_sent_per_node, 5u * 128u);
}

TEST(DsgdStep, IdentityMixingIsLocalSgd) {
  const SyntheticLeastSquares p(3, 4, 3.0, 2.0, 1);
  const Topology isolated = Topology::from_edges(GraphKind::kComplete, 3, {}, Weighting::kMetropolis);
  const HyperParams hp = params(1.0, 0.1, 0.5);
  const RandomStreams streams(3);
  AlgState s = init_state(p, isolated, hp, ones(4), streams);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd X = s.X;
    dsgd_step(s, p, isolated, CompressorSpec::identity(4), hp, streams);
    EXPECT_LT((s.X - (X - hp.eta * s.M)).cwiseAbs().maxCoeff(), 1e-15);
    for (Eigen::Index c = 0; c < 3; ++c) {
      Rng rng = streams.stream(static_cast<std::uint64_t>(c), s.t, Purpose::kGradient);
      EXPECT_EQ(s.M.col(c), p.stoch_grad(static_cast<std::size_t>(c), X.col(c), 1, rng));
    }
  }
}

TEST(D2Step, FirstAndSecondStepRules) {
  const SyntheticLeastSquares p(4, 3, 3.0, 1.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  const HyperParams hp = params(1.0, 0.05, 0.5);
  const RandomStreams streams(3);
  AlgState s = init_state(p, topo, hp, ones(3), streams);
  const Eigen::MatrixXd X0 = s.X;
  d2_step(s, p, topo, CompressorSpec::identity(3), hp, streams);
  const Eigen::MatrixXd g0 = s.M;
  EXPECT_LT((s.X - (X0 - hp.eta * g0) * topo.W()).cwiseAbs().maxCoeff(), 1e-14);
  const Eigen::MatrixXd X1 = s.X;
  d2_step(s, p, topo, CompressorSpec::identity(3), hp, streams);
  const Eigen::MatrixXd g1 = s.M;
  const Eigen::MatrixXd expected = (2 * X1 - X0 - hp.eta * (g1 - g0)) * topo.W();
  EXPECT_LT((s.X - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(s.bits_sent_per_node, 2u * 96u);
}

TEST(Invariants, IdentityCompressionOnCompleteGraphMirrorsExactly) {
  const SyntheticLeastSquares p(5, 4, 3.0, 2.0, 1);
  const Topology topo = build_topology(GraphKind::kComplete, 5, {}, 0);
  const HyperParams hp = params(1.0, 0.05, 0.3);
  const RandomStreams streams(2);
  AlgState s = init_state(p, topo, hp, ones(4), streams);
  for (int t = 0; t < 40; ++t) {
    motef_step(s, p, topo, CompressorSpec::identity(4), hp, streams);
    EXPECT_LT((s.H - s.X).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((s.G - s.V).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Invariants, FrozenModelMomentumConvergesGeometrically) {
  const SyntheticLeastSquares p(3, 4, 3.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 3, {}, 0);
  HyperParams hp = params(0.0, 0.0, 0.2);
  const RandomStreams streams(2);
  AlgState s = init_state(p, topo, hp, ones(4), streams);
  s.M.setZero();
  s.V = s.M;
  s.G = s.M;
  const Eigen::MatrixXd target = p.exact_grad_matrix(s.X);
  const double start = (s.M - target).norm();
  for (int t = 1; t <= 60; ++t) {
    motef_step(s, p, topo, CompressorSpec::top_k(1, 4), hp, streams);
    EXPECT_LE((s.M - target).norm(), std::pow(1 - hp.lambda_momentum, t) * start + 1e-12);
  }
}

TEST(Run, ZeroIterationsGiveOneRecord) {
  const SyntheticLeastSquares p(4, 3, 1.0, 1.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.5, 0.05, 0.5);
  hp.iters = 0;
  const auto records = run(p, topo, CompressorSpec::top_k(1, 3), hp, {});
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].t, 0u);
  EXPECT_EQ(records[0].bits_cum, 0u);
}

TEST(Run, RecordSchedule) {
  const SyntheticLeastSquares p(4, 3, 1.0, 1.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.5, 0.05, 0.5);
  hp.iters = 25;
  RunOptions options;
  options.eval_every = 10;
  const auto records = run(p, topo, CompressorSpec::top_k(1, 3), hp, options);
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[1].t, 10u);
  EXPECT_EQ(records[2].t, 20u);
  EXPECT_EQ(records[3].t, 25u);
  EXPECT_EQ(records[3].bits_cum, 25u * 2u * (32u + 2u));
}

TEST(Run, SameSeedSameTrajectory) {
  const SyntheticLeastSquares p(4, 6, 3.0, 5.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.3, 0.02, 0.1);
  hp.iters = 100;
  RunOptions options;
  options.seed = 17;
  options.eval_every = 7;
  for (auto kind : {AlgorithmKind::kMotef, AlgorithmKind::kMotefVr, AlgorithmKind::kChoco,
                    AlgorithmKind::kDsgd, AlgorithmKind::kD2}) {
    options.kind = kind;
    const auto a = run(p, topo, CompressorSpec::rand_k(2, 6), hp, options);
    const auto b = run(p, topo, CompressorSpec::rand_k(2, 6), hp, options);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].grad_norm_sq, b[i].grad_norm_sq);
      EXPECT_EQ(a[i].loss, b[i].loss);
    }
  }
}

TEST(Run, NoiselessMotefDecreasesGradientAfterBurnIn) {
  const SyntheticLeastSquares p(4, 5, 3.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.5, 0.02, 0.5);
  hp.iters = 3000;
  RunOptions options;
  options.eval_every = 50;
  options.x0 = ones(5);
  const auto records = run(p, topo, CompressorSpec::top_k(2, 5), hp, options);
  for (std::size_t i = records.size() / 3; i + 1 < records.size(); ++i)
    if (records[i].grad_norm_sq > 1e-24) EXPECT_LT(records[i + 1].grad_norm_sq, records[i].grad_norm_sq) << "at t=" << records[i + 1].t;
}

TEST(Run, StopsEarlyAtTarget) {
  const SyntheticLeastSquares p(4, 5, 3.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.5, 0.02, 0.5);
  hp.iters = 100000;
  RunOptions options;
  options.x0 = ones(5);
  options.stop_grad_norm_sq = 1e-3;
  const auto records = run(p, topo, CompressorSpec::top_k(2, 5), hp, options);
  EXPECT_LE(records.back().grad_norm_sq, 1e-3);
  EXPECT_GT(records[records.size() - 2].grad_norm_sq, 1e-3);
  EXPECT_LT(records.back().t, 100000u);
}

TEST(Run, RejectsCompressorDimensionMismatch) {
  const SyntheticLeastSquares p(4, 5, 3.0, 0.0, 1);
  const Topology topo = build_topology(GraphKind::kRing, 4, {}, 0);
  HyperParams hp = params(0.5, 0.02, 0.5);
  EXPECT_THROW(run(p, topo, CompressorSpec::top_k(2, 6), hp, {}), ValidationError);
}

}  // namespace
}  // namespace motef
