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

#include "motef/problems.hpp"

#include <cmath>
#include <string>

#include "motef/errors.hpp"

namespace motef {
namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- Problem

void Problem::stoch_grad_into(std::size_t client, const VectorRef& x, std::size_t batch, Rng& rng,
                              Eigen::Ref<Eigen::VectorXd> out) const {
  sampled_grad_into(client, x, draw_sample(client, batch, rng), out);
}

std::optional<double> Problem::suboptimality(const VectorRef& x) const {
  const auto fs = f_star();
  if (!fs) return std::nullopt;
  return loss(x) - *fs;
}

Eigen::VectorXd Problem::exact_grad(std::size_t client, const VectorRef& x) const {
  Eigen::VectorXd g(idx(d()));
  exact_grad_into(client, x, g);
  return g;
}

Eigen::VectorXd Problem::stoch_grad(std::size_t client, const VectorRef& x, std::size_t batch,
                                    Rng& rng) const {
  Eigen::VectorXd g(idx(d()));
  stoch_grad_into(client, x, batch, rng, g);
  return g;
}

Eigen::VectorXd Problem::sampled_grad(std::size_t client, const VectorRef& x,
                                      const SampleDraw& sample) const {
  Eigen::VectorXd g(idx(d()));
  sampled_grad_into(client, x, sample, g);
  return g;
}

double Problem::loss(const VectorRef& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < n(); ++i) total += local_loss(i, x);
  return total / static_cast<double>(n());
}

Eigen::VectorXd Problem::full_grad(const VectorRef& x) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(idx(d()));
  Eigen::VectorXd g(idx(d()));
  for (std::size_t i = 0; i < n(); ++i) {
    exact_grad_into(i, x, g);
    total += g;
  }
  return total / static_cast<double>(n());
}

Eigen::MatrixXd Problem::exact_grad_matrix(const Eigen::MatrixXd& X) const {
  if (X.rows() != idx(d()) || X.cols() != idx(n()))
    throw ValidationError("state matrix has shape " + std::to_string(X.rows()) + "x" +
                          std::to_string(X.cols()) + ", expected " + std::to_string(d()) + "x" +
                          std::to_string(n()));
  Eigen::MatrixXd G(X.rows(), X.cols());
  for (std::size_t i = 0; i < n(); ++i) exact_grad_into(i, X.col(idx(i)), G.col(idx(i)));
  return G;
}

// ------------------------------------------------------- SyntheticLeastSquares

SyntheticLeastSquares::SyntheticLeastSquares(std::size_t n, std::size_t d, double zeta,
                                             double sigma, std::uint64_t seed)
    : zeta_(zeta), sigma_(sigma) {
  if (n == 0 || d == 0) throw ValidationError("synthetic problem needs n >= 1 and d >= 1");
  if (!(zeta >= 0.0) || !(sigma >= 0.0))
    throw ValidationError("synthetic problem needs zeta >= 0 and sigma >= 0");
  b_ = Eigen::MatrixXd::Zero(idx(d), idx(n));
  if (zeta > 0.0) {
    for (std::size_t c = 0; c < n; ++c) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Purpose::kProblem), c));
      std::normal_distribution<double> normal(0.0, zeta / static_cast<double>(c + 1));
      for (std::size_t j = 0; j < d; ++j) b_(idx(j), idx(c)) = normal(rng);
    }
  }
  finish();
}

SyntheticLeastSquares::SyntheticLeastSquares(Eigen::MatrixXd targets, double zeta, double sigma)
    : b_(std::move(targets)), zeta_(zeta), sigma_(sigma) {
  if (b_.rows() == 0 || b_.cols() == 0)
    throw ValidationError("synthetic problem needs n >= 1 and d >= 1");
  if (!(sigma >= 0.0)) throw ValidationError("synthetic problem needs sigma >= 0");
  finish();
}

void SyntheticLeastSquares::finish() {
  const std::size_t n = this->n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  scale_.resize(n);
  for (std::size_t c = 0; c < n; ++c) scale_[c] = static_cast<double>(c + 1) / sqrt_n;

  double sum_sq = 0.0;
  x_star_ = Eigen::VectorXd::Zero(b_.rows());
  for (std::size_t c = 0; c < n; ++c) {
    sum_sq += scale_[c] * scale_[c];
    x_star_ += scale_[c] * b_.col(idx(c));
  }
  x_star_ /= sum_sq;
  f_star_ = loss(x_star_);
}

void SyntheticLeastSquares::exact_grad_into(std::size_t client, const VectorRef& x,
                                            Eigen::Ref<Eigen::VectorXd> out) const {
  const double a = scale_.at(client);
  out.noalias() = (a * a) * x - a * b_.col(idx(client));
}

double SyntheticLeastSquares::local_loss(std::size_t client, const VectorRef& x) const {
  const double a = scale_.at(client);
  return 0.5 * (a * x - b_.col(idx(client))).squaredNorm();
}

SampleDraw SyntheticLeastSquares::draw_sample(std::size_t, std::size_t batch, Rng& rng) const {
  if (batch == 0) throw ValidationError("batch must be >= 1");
  SampleDraw draw;
  draw.noise.resize(b_.rows());
  const double sd = sigma_ / std::sqrt(static_cast<double>(b_.rows() * batch));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 0; j < draw.noise.size(); ++j) draw.noise(j) = sd * normal(rng);
  return draw;
}

void SyntheticLeastSquares::sampled_grad_into(std::size_t client, const VectorRef& x,
                                              const SampleDraw& sample,
                                              Eigen::Ref<Eigen::VectorXd> out) const {
  exact_grad_into(client, x, out);
  if (sample.noise.size() != 0) out += sample.noise;
}

void SyntheticLeastSquares::stoch_grad_into(std::size_t client, const VectorRef& x,
                                            std::size_t batch, Rng& rng,
                                            Eigen::Ref<Eigen::VectorXd> out) const {
  if (batch == 0) throw ValidationError("batch must be >= 1");
  exact_grad_into(client, x, out);
  if (sigma_ == 0.0) return;
  const double sd = sigma_ / std::sqrt(static_cast<double>(b_.rows() * batch));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j = 0; j < out.size(); ++j) out(j) += sd * normal(rng);
}

double SyntheticLeastSquares::smoothness() const noexcept {
  return scale_.back() * scale_.back();
}

std::optional<double> SyntheticLeastSquares::suboptimality(const VectorRef& x) const {
  double mean_sq = 0.0;
  for (double a : scale_) mean_sq += a * a;
  mean_sq /= static_cast<double>(scale_.size());
  return 0.5 * mean_sq * (x - x_star_).squaredNorm();
}

std::pair<Eigen::VectorXd, double> synth_xstar(const SyntheticLeastSquares& problem) {
  return {*problem.x_star(), *problem.f_star()};
}

// -------------------------------------------------------- LogisticRegressionNC

LogisticRegressionNC::SparseRows LogisticRegressionNC::to_sparse(const LibSVMDataset& data,
                                                                 std::size_t d) {
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t r = 0; r < data.m(); ++r)
    for (auto [j, v] : data.rows[r].features) {
      if (j >= d) throw ValidationError("feature index exceeds problem dimension");
      entries.emplace_back(idx(r), idx(j), v);
    }
  SparseRows rows(idx(data.m()), idx(d));
  rows.setFromTriplets(entries.begin(), entries.end());
  rows.makeCompressed();
  return rows;
}

LogisticRegressionNC::LogisticRegressionNC(const std::vector<LibSVMDataset>& shards,
                                           double reg_lambda, std::size_t d)
    : reg_(reg_lambda) {
  if (shards.empty()) throw ValidationError("logistic regression needs at least one shard");
  if (!(reg_lambda >= 0.0)) throw ValidationError("reg_lambda must be >= 0");
  d_ = d;
  for (const auto& s : shards) d_ = std::max(d_, s.d);
  if (d_ == 0) throw ValidationError("logistic regression needs d >= 1");

  double worst = 0.0;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (shards[i].m() == 0) throw ValidationError("shard " + std::to_string(i) + " is empty");
    Shard s{to_sparse(shards[i], d_), Eigen::VectorXd(idx(shards[i].m()))};
    for (std::size_t r = 0; r < shards[i].m(); ++r)
      s.labels(idx(r)) = static_cast<double>(shards[i].rows[r].label);
    worst = std::max(worst, s.features.squaredNorm() / (4.0 * static_cast<double>(shards[i].m())));
    shards_.push_back(std::move(s));
  }
  smoothness_ = worst + 2.0 * reg_;
}

void LogisticRegressionNC::set_test_set(const LibSVMDataset& test) {
  if (test.m() == 0) throw ValidationError("test set is empty");
  Shard s{to_sparse(test, d_), Eigen::VectorXd(idx(test.m()))};
  for (std::size_t r = 0; r < test.m(); ++r) s.labels(idx(r)) = test.rows[r].label;
  test_ = std::move(s);
}

double LogisticRegressionNC::regularizer(const VectorRef& x) const {
  return reg_ * (x.array().square() / (1.0 + x.array().square())).sum();
}

Eigen::VectorXd LogisticRegressionNC::regularizer_grad(const VectorRef& x) const {
  const Eigen::ArrayXd den = 1.0 + x.array().square();
  return (reg_ * 2.0 * x.array() / den.square()).matrix();
}

void LogisticRegressionNC::exact_grad_into(std::size_t client, const VectorRef& x,
                                           Eigen::Ref<Eigen::VectorXd> out) const {
  const Shard& s = shards_.at(client);
  const Eigen::VectorXd margins = s.features * x;
  Eigen::VectorXd weights(margins.size());
  for (Index r = 0; r < margins.size(); ++r)
    weights(r) = -s.labels(r) * logistic(-s.labels(r) * margins(r));
  out.noalias() = s.features.transpose() * weights;
  out /= static_cast<double>(margins.size());
  out += regularizer_grad(x);
}

double LogisticRegressionNC::local_loss(std::size_t client, const VectorRef& x) const {
  const Shard& s = shards_.at(client);
  const Eigen::VectorXd margins = s.features * x;
  double total = 0.0;
  for (Index r = 0; r < margins.size(); ++r) total += softplus(-s.labels(r) * margins(r));
  return total / static_cast<double>(margins.size()) + regularizer(x);
}

SampleDraw LogisticRegressionNC::draw_sample(std::size_t client, std::size_t batch,
                                             Rng& rng) const {
  if (batch == 0) throw ValidationError("batch must be >= 1");
  const auto m = static_cast<std::size_t>(shards_.at(client).features.rows());
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  SampleDraw draw;
  draw.rows.resize(batch);
  for (auto& r : draw.rows) r = pick(rng);
  return draw;
}

void LogisticRegressionNC::sampled_grad_into(std::size_t client, const VectorRef& x,
                                             const SampleDraw& sample,
                                             Eigen::Ref<Eigen::VectorXd> out) const {
  const Shard& s = shards_.at(client);
  if (sample.rows.empty()) throw ValidationError("sample draw has no rows");
  out.setZero();
  for (std::size_t r : sample.rows) {
    const Index row = idx(r);
    const double y = s.labels(row);
    double margin = 0.0;
    for (SparseRows::InnerIterator it(s.features, row); it; ++it) margin += it.value() * x(it.col());
    const double w = -y * logistic(-y * margin);
    for (SparseRows::InnerIterator it(s.features, row); it; ++it) out(it.col()) += w * it.value();
  }
  out /= static_cast<double>(sample.rows.size());
  out += regularizer_grad(x);
}

std::optional<double> LogisticRegressionNC::test_accuracy(const VectorRef& x) const {
  if (!test_) return std::nullopt;
  const Eigen::VectorXd margins = test_->features * x;
  std::size_t correct = 0;
  for (Index r = 0; r < margins.size(); ++r) {
    const double predicted = margins(r) >= 0.0 ? 1.0 : -1.0;
    if (predicted == test_->labels(r)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(margins.size());
}

}  // namespace motef
