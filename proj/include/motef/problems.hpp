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
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "motef/libsvm.hpp"
#include "motef/random.hpp"

namespace motef {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// The randomness behind one stochastic gradient, kept so the same sample can
/// be evaluated at two points (paired / STORM-style estimators).
struct SampleDraw {
  std::vector<std::size_t> rows;  // sampled data rows (finite-sum problems)
  Eigen::VectorXd noise;          // additive gradient noise (synthetic problems)
};

/// Local objectives f_1..f_n of f = (1/n) sum_i f_i behind exact and
/// stochastic gradient oracles. Implementations are immutable; every random
/// draw comes from a caller-provided stream.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t n() const noexcept = 0;
  virtual std::size_t d() const noexcept = 0;

  // grad f_i(x) written into `out` (length d).
  virtual void exact_grad_into(std::size_t client, const VectorRef& x,
                               Eigen::Ref<Eigen::VectorXd> out) const = 0;
  virtual double local_loss(std::size_t client, const VectorRef& x) const = 0;

  virtual SampleDraw draw_sample(std::size_t client, std::size_t batch, Rng& rng) const = 0;
  virtual void sampled_grad_into(std::size_t client, const VectorRef& x, const SampleDraw& sample,
                                 Eigen::Ref<Eigen::VectorXd> out) const = 0;
  virtual bool supports_paired_samples() const noexcept { return true; }

  // Equivalent to sampled_grad_into(draw_sample(...)); overridden where a
  // cheaper path exists.
  virtual void stoch_grad_into(std::size_t client, const VectorRef& x, std::size_t batch, Rng& rng,
                               Eigen::Ref<Eigen::VectorXd> out) const;

  // Smoothness constant L of every f_i (an upper bound where not exact).
  virtual double smoothness() const noexcept = 0;

  virtual std::optional<double> f_star() const { return std::nullopt; }
  virtual std::optional<Eigen::VectorXd> x_star() const { return std::nullopt; }
  // f(x) - f*, when f* is known.
  virtual std::optional<double> suboptimality(const VectorRef& x) const;
  virtual std::optional<double> test_accuracy(const VectorRef&) const { return std::nullopt; }

  Eigen::VectorXd exact_grad(std::size_t client, const VectorRef& x) const;
  Eigen::VectorXd stoch_grad(std::size_t client, const VectorRef& x, std::size_t batch,
                             Rng& rng) const;
  Eigen::VectorXd sampled_grad(std::size_t client, const VectorRef& x,
                               const SampleDraw& sample) const;

  double loss(const VectorRef& x) const;          // f(x)
  Eigen::VectorXd full_grad(const VectorRef& x) const;  // grad f(x)

  // grad F(X): column i is grad f_i(x_i).
  Eigen::MatrixXd exact_grad_matrix(const Eigen::MatrixXd& X) const;
};

/// f_i(x) = 1/2 ||A_i x - b_i||^2 with A_i = (i / sqrt(n)) I, i = 1..n, and
/// b_i ~ N(0, (zeta^2 / i^2) I). Stochastic gradients add N(0, sigma^2/(d*batch) I)
/// noise so that E||g - grad f_i||^2 = sigma^2 / batch.
class SyntheticLeastSquares final : public Problem {
 public:
  SyntheticLeastSquares(std::size_t n, std::size_t d, double zeta, double sigma,
                        std::uint64_t seed);
  // Explicit targets, one column per client.
  SyntheticLeastSquares(Eigen::MatrixXd targets, double zeta, double sigma);

  std::size_t n() const noexcept override { return static_cast<std::size_t>(b_.cols()); }
  std::size_t d() const noexcept override { return static_cast<std::size_t>(b_.rows()); }

  void exact_grad_into(std::size_t client, const VectorRef& x,
                       Eigen::Ref<Eigen::VectorXd> out) const override;
  double local_loss(std::size_t client, const VectorRef& x) const override;
  SampleDraw draw_sample(std::size_t client, std::size_t batch, Rng& rng) const override;
  void sampled_grad_into(std::size_t client, const VectorRef& x, const SampleDraw& sample,
                         Eigen::Ref<Eigen::VectorXd> out) const override;
  void stoch_grad_into(std::size_t client, const VectorRef& x, std::size_t batch, Rng& rng,
                       Eigen::Ref<Eigen::VectorXd> out) const override;

  // max_i i^2 / n = n.
  double smoothness() const noexcept override;
  std::optional<double> f_star() const override { return f_star_; }
  std::optional<Eigen::VectorXd> x_star() const override { return x_star_; }
  // Exact quadratic form 1/2 * mean_i(a_i^2) * ||x - x*||^2 (no cancellation).
  std::optional<double> suboptimality(const VectorRef& x) const override;

  double zeta() const noexcept { return zeta_; }
  double sigma() const noexcept { return sigma_; }
  // a_i = i / sqrt(n) for 0-based client index i - 1.
  double scale(std::size_t client) const noexcept { return scale_[client]; }
  const Eigen::MatrixXd& targets() const noexcept { return b_; }

 private:
  void finish();

  Eigen::MatrixXd b_;
  std::vector<double> scale_;
  double zeta_ = 0.0;
  double sigma_ = 0.0;
  Eigen::VectorXd x_star_;
  double f_star_ = 0.0;
};

/// Closed-form minimizer x* = (sum_i a_i^2)^{-1} sum_i a_i b_i and f(x*).
std::pair<Eigen::VectorXd, double> synth_xstar(const SyntheticLeastSquares& problem);

/// Logistic loss with the non-convex regularizer reg * sum_j x_j^2 / (1 + x_j^2):
/// f_i(x) = (1/m) sum_r log(1 + exp(-y_r a_r^T x)) + reg * sum_j x_j^2 / (1 + x_j^2).
/// Stochastic gradients sample `batch` rows uniformly with replacement.
class LogisticRegressionNC final : public Problem {
 public:
  // `d` may exceed the shards' width (e.g. to match a test set).
  LogisticRegressionNC(const std::vector<LibSVMDataset>& shards, double reg_lambda,
                       std::size_t d = 0);

  void set_test_set(const LibSVMDataset& test);

  std::size_t n() const noexcept override { return shards_.size(); }
  std::size_t d() const noexcept override { return d_; }

  void exact_grad_into(std::size_t client, const VectorRef& x,
                       Eigen::Ref<Eigen::VectorXd> out) const override;
  double local_loss(std::size_t client, const VectorRef& x) const override;
  SampleDraw draw_sample(std::size_t client, std::size_t batch, Rng& rng) const override;
  void sampled_grad_into(std::size_t client, const VectorRef& x, const SampleDraw& sample,
                         Eigen::Ref<Eigen::VectorXd> out) const override;

  // max_i (1/(4 m_i)) sum_r ||a_r||^2 + 2 * reg.
  double smoothness() const noexcept override { return smoothness_; }
  std::optional<double> test_accuracy(const VectorRef& x) const override;

  double reg_lambda() const noexcept { return reg_; }
  double regularizer(const VectorRef& x) const;
  Eigen::VectorXd regularizer_grad(const VectorRef& x) const;

 private:
  using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  struct Shard {
    SparseRows features;
    Eigen::VectorXd labels;
  };

  static SparseRows to_sparse(const LibSVMDataset& data, std::size_t d);

  std::vector<Shard> shards_;
  std::optional<Shard> test_;
  std::size_t d_ = 0;
  double reg_ = 0.0;
  double smoothness_ = 0.0;
};

}  // namespace motef
