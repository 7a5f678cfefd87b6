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

// Randomized invariants checked over many generated instances.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "motef/algorithms.hpp"
#include "motef/compressors.hpp"
#include "motef/diagnostics.hpp"
#include "motef/harness.hpp"
#include "motef/libsvm.hpp"
#include "motef/problems.hpp"
#include "motef/topology.hpp"

namespace motef {
namespace {

constexpr int kTrials = 40;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Topology random_topology(Rng& rng, std::size_t n) {
  GraphParams params;
  params.lazy = pick(rng, 0, 1) == 1;
  switch (pick(rng, 0, 3)) {
    case 0: return build_topology(GraphKind::kRing, n, params, 0);
    case 1: return build_topology(GraphKind::kStar, n, params, 0);
    case 2: return build_topology(GraphKind::kComplete, n, params, 0);
    default:
      params.p = 0.6;
      return build_topology(GraphKind::kErdosRenyi, n, params, rng());
  }
}

CompressorSpec random_compressor(Rng& rng, std::size_t d) {
  switch (pick(rng, 0, 3)) {
    case 0: return CompressorSpec::top_k(pick(rng, 1, d), d);
    case 1: return CompressorSpec::rand_k(pick(rng, 1, d), d);
    case 2: return CompressorSpec::gsgd(static_cast<unsigned>(pick(rng, 2, 6)), d);
    default: return CompressorSpec::identity(d);
  }
}

Eigen::VectorXd gaussian(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal;
  return Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(d), [&] { return normal(rng); });
}

TEST(Properties, MixingMatricesAreDoublyStochastic) {
  Rng rng(11);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = pick(rng, 2, 30);
    const Topology t = random_topology(rng, n);
    const Eigen::MatrixXd& W = t.W();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    EXPECT_LT((W - W.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((W * ones - ones).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(W.minCoeff(), 0.0);
    EXPECT_GT(t.rho(), 0.0);
    EXPECT_LE(t.rho(), 1.0 + 1e-12);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !t.is_edge(i, j)) {
          EXPECT_EQ(W(Eigen::Index(i), Eigen::Index(j)), 0.0);
        }
  }
}

TEST(Properties, GossipContractsDisagreementByGap) {
  Rng rng(12);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = pick(rng, 2, 20);
    const Topology t = random_topology(rng, n);
    Eigen::MatrixXd X(3, static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < X.cols(); ++c) X.col(c) = gaussian(rng, 3);
    const auto spread = [](const Eigen::MatrixXd& Y) {
      return (Y.colwise() - Y.rowwise().mean()).squaredNorm();
    };
    const Eigen::MatrixXd Y = X * t.W();
    EXPECT_LE(spread(Y), std::pow(1 - t.rho(), 2) * spread(X) * (1 + 1e-9) + 1e-12);
    EXPECT_LT((Y.rowwise().mean() - X.rowwise().mean()).norm(), 1e-12);
  }
}

TEST(Properties, DeterministicCompressorsContract) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = pick(rng, 1, 40);
    const CompressorSpec spec = pick(rng, 0, 1) == 0
                                    ? CompressorSpec::top_k(pick(rng, 1, d), d)
                                    : CompressorSpec::gsgd(static_cast<unsigned>(pick(rng, 2, 8)),
                                                           d, GsgdRounding::kNearest);
    const Eigen::VectorXd x = gaussian(rng, d) * uniform(rng, 1e-3, 1e3);
    const auto msg = compress(spec, std::span<const double>(x.data(), d), rng);
    if (spec.family == CompressorFamily::kTopK) {
      EXPECT_LE((msg.payload - x).squaredNorm(), (1 - alpha_of(spec)) * x.squaredNorm() * (1 + 1e-12));
    }
    EXPECT_EQ(msg.bits, message_bits(spec));
  }
}

TEST(Properties, TopKKeepsLargestMagnitudes) {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = pick(rng, 1, 30);
    const std::size_t k = pick(rng, 1, d);
    const Eigen::VectorXd x = gaussian(rng, d);
    const auto msg = compress(CompressorSpec::top_k(k, d), std::span<const double>(x.data(), d), rng);
    std::vector<double> mags(x.data(), x.data() + d);
    for (double& m : mags) m = std::abs(m);
    std::sort(mags.rbegin(), mags.rend());
    std::size_t kept = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (msg.payload(Eigen::Index(i)) != 0.0) {
        ++kept;
        EXPECT_EQ(msg.payload(Eigen::Index(i)), x(Eigen::Index(i)));
        EXPECT_GE(std::abs(x(Eigen::Index(i))), mags[k - 1]);
      }
    }
    EXPECT_EQ(kept, k);
  }
}

TEST(Properties, CompressionIsDeterministicPerStream) {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = pick(rng, 1, 30);
    const CompressorSpec spec = random_compressor(rng, d);
    const Eigen::VectorXd x = gaussian(rng, d);
    const std::uint64_t seed = rng();
    Rng a(seed), b(seed);
    const auto ma = compress(spec, std::span<const double>(x.data(), d), a);
    const auto mb = compress(spec, std::span<const double>(x.data(), d), b);
    EXPECT_EQ(ma.payload, mb.payload);
    EXPECT_EQ(parse_compressor(to_string(spec), d).family, spec.family);
  }
}

// Tracking: mean of V equals mean of M after every step, and x_bar moves by -eta v_bar.
TEST(Properties, MotefTracksTheMeanMomentum) {
  Rng rng(16);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = pick(rng, 1, 10), d = pick(rng, 1, 12);
    const SyntheticLeastSquares p(n, d, uniform(rng, 0, 5), uniform(rng, 0, 5), rng());
    const Topology topo = random_topology(rng, n);
    const CompressorSpec c = random_compressor(rng, d);
    HyperParams hp;
    hp.gamma = uniform(rng, 0.01, 1.0);
    hp.eta = uniform(rng, 1e-4, 0.05);
    hp.lambda_momentum = uniform(rng, 0.01, 1.0);
    hp.batch = pick(rng, 1, 4);
    const RandomStreams streams(rng());
    const bool vr = pick(rng, 0, 1) == 1;
    AlgState s = init_state(p, topo, hp, gaussian(rng, d), streams);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x_bar = s.x_bar();
      const Eigen::VectorXd v_bar = s.v_bar();
      if (vr)
        motef_vr_step(s, p, topo, c, hp, streams);
      else
        motef_step(s, p, topo, c, hp, streams);
      const double scale = 1 + s.M.cwiseAbs().maxCoeff() + s.V.cwiseAbs().maxCoeff();
      ASSERT_LT((s.v_bar() - s.m_bar()).cwiseAbs().maxCoeff(), 1e-11 * scale);
      ASSERT_LT((s.x_bar() - (x_bar - hp.eta * v_bar)).cwiseAbs().maxCoeff(), 1e-11 * (1 + x_bar.norm()));
    }
  }
}

TEST(Properties, BaselinesMoveTheMeanByTheMeanGradient) {
  Rng rng(17);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = pick(rng, 1, 10), d = pick(rng, 1, 12);
    const SyntheticLeastSquares p(n, d, uniform(rng, 0, 5), uniform(rng, 0, 5), rng());
    const Topology topo = random_topology(rng, n);
    const CompressorSpec c = random_compressor(rng, d);
    HyperParams hp;
    hp.gamma = uniform(rng, 0.01, 1.0);
    hp.eta = uniform(rng, 1e-4, 0.05);
    const RandomStreams streams(rng());
    const AlgorithmKind kind = pick(rng, 0, 1) == 0 ? AlgorithmKind::kChoco : AlgorithmKind::kDsgd;
    AlgState s = init_state(p, topo, hp, gaussian(rng, d), streams);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x_bar = s.x_bar();
      step(kind, s, p, topo, c, hp, streams);
      ASSERT_LT((s.x_bar() - (x_bar - hp.eta * s.m_bar())).cwiseAbs().maxCoeff(),
                1e-11 * (1 + x_bar.norm() + s.M.norm()));
    }
  }
}

TEST(Properties, BitsGrowLinearly) {
  Rng rng(18);
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n = pick(rng, 1, 6), d = pick(rng, 1, 12);
    const SyntheticLeastSquares p(n, d, 1.0, 1.0, rng());
    const Topology topo = random_topology(rng, n);
    const CompressorSpec c = random_compressor(rng, d);
    HyperParams hp;
    hp.iters = pick(rng, 0, 30);
    RunOptions options;
    options.kind = static_cast<AlgorithmKind>(pick(rng, 0, 5));
    options.eval_every = pick(rng, 1, 7);
    const auto records = run(p, topo, c, hp, options);
    for (const auto& r : records) EXPECT_EQ(r.bits_cum, r.t * bits_per_round(options.kind, c, d));
    EXPECT_EQ(records.back().t, hp.iters);
  }
}

TEST(Properties, ExactGradientsMatchFiniteDifferences) {
  Rng rng(19);
  LibSVMDataset data;
  data.d = 6;
  for (int i = 0; i < 30; ++i) {
    LibSVMDataset::Row row;
    row.label = pick(rng, 0, 1) == 0 ? -1 : 1;
    for (std::size_t j = 0; j < 6; ++j)
      if (pick(rng, 0, 2) != 0) row.features.emplace_back(j, uniform(rng, -2, 2));
    data.rows.push_back(row);
  }
  const LogisticRegressionNC logreg(shard(data, 3), 0.1);
  const SyntheticLeastSquares synth(3, 6, 2.0, 0.0, 4);
  for (const Problem* p : {static_cast<const Problem*>(&logreg), static_cast<const Problem*>(&synth)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd x = gaussian(rng, 6);
      for (std::size_t c = 0; c < 3; ++c) {
        const Eigen::VectorXd g = p->exact_grad(c, x);
        for (Eigen::Index j = 0; j < 6; ++j) {
          const double h = 1e-6;
          Eigen::VectorXd xp = x, xm = x;
          xp(j) += h;
          xm(j) -= h;
          const double fd = (p->local_loss(c, xp) - p->local_loss(c, xm)) / (2 * h);
          EXPECT_NEAR(g(j), fd, 1e-6 * (1 + std::abs(fd)));
        }
      }
    }
  }
}

TEST(Properties, GradientsAreSmooth) {
  Rng rng(20);
  const SyntheticLeastSquares synth(5, 4, 2.0, 0.0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = gaussian(rng, 4), y = gaussian(rng, 4);
    for (std::size_t c = 0; c < 5; ++c)
      EXPECT_LE((synth.exact_grad(c, x) - synth.exact_grad(c, y)).norm(),
                synth.smoothness() * (x - y).norm() * (1 + 1e-12));
  }
}

TEST(Properties, CsvRowsRoundTrip) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    MetricsRecord r;
    r.t = rng() % 100000;
    r.bits_cum = rng();
    r.grad_norm_sq = std::exp(uniform(rng, -50, 50));
    r.consensus = std::exp(uniform(rng, -50, 50));
    r.loss = uniform(rng, -10, 10);
    if (pick(rng, 0, 1)) r.subopt = std::exp(uniform(rng, -30, 5));
    std::ostringstream out;
    write_csv(out, {r});
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    while (fields.size() < 7) fields.emplace_back();
    EXPECT_EQ(std::stoull(fields[0]), r.t);
    EXPECT_EQ(std::stoull(fields[1]), r.bits_cum);
    EXPECT_EQ(std::stod(fields[2]), r.grad_norm_sq);
    EXPECT_EQ(std::stod(fields[3]), r.consensus);
    EXPECT_EQ(std::stod(fields[4]), r.loss);
    EXPECT_EQ(fields[5].empty(), !r.subopt.has_value());
    if (r.subopt) {
      EXPECT_EQ(std::stod(fields[5]), *r.subopt);
    }
  }
}

// Random points between the grid nodes.
TEST(Properties, DescentConstantsHoldOffGrid) {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = std::pow(10.0, uniform(rng, -2, 0));
    const double rho = std::pow(10.0, uniform(rng, -3, 0));
    const double tau = std::pow(10.0, uniform(rng, -2, 0));
    const std::size_t n = pick(rng, 1, 2000);
    const auto s = build_constant_system(ConstantFamily::kNonconvex, alpha, rho, n, tau);
    EXPECT_GE(s.margin(), -kConstantTolerance)
        << "alpha=" << alpha << " rho=" << rho << " tau=" << tau << " n=" << n;
    const auto v = build_constant_system(ConstantFamily::kVr, alpha, rho, n, tau);
    EXPECT_GE(v.margin(), -kConstantTolerance)
        << "alpha=" << alpha << " rho=" << rho << " tau=" << tau << " n=" << n;
  }
}

}  // namespace
}  // namespace motef
