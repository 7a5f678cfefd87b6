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

#include "motef/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "motef/errors.hpp"

namespace motef {
namespace {

bool in_unit(double v) { return v > 0.0 && v <= 1.0; }

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

// A and b1 for the momentum-tracking (nonconvex and PL) recursion.
void fill_tracking(ConstantSystem& s) {
  const double a = s.alpha, r = s.rho, C = s.C, L = s.L, L2 = L * L;
  const double lam = s.lambda, g = s.gamma, eta = s.eta;
  const double n = static_cast<double>(s.n);
  const double lam2 = lam * lam, g2 = g * g, eta2 = eta * eta;

  s.delta << lam, lam, a / 2 - 6 * g2 * C / a, a / 2 - 6 * g2 * C / a, g * r / 2,
      g * r / 2 - 36 * eta2 * lam2 * L2 / (g * r);

  Matrix6& A = s.A;
  A.setZero();
  A.row(0) << 0, 0, 3 * L2 * n * g2 * C / lam, 0, 3 * L2 * n * g2 * C / lam, 3 * L2 * n * eta2 / lam;
  A.row(1) << 0, 0, 3 * L2 * g2 * C / lam, 0, 3 * L2 * g2 * C / lam, 3 * L2 * eta2 / lam;
  A.row(2) << 0, 0, 0, 0, 6 * g2 * C / a, 6 * eta2 / a;
  A.row(3) << 0, 6 * lam2 / a, 36 * lam2 * g2 * L2 * C / a, 0, 36 * lam2 * g2 * L2 * C / a,
      6 * g2 * C / a + 36 * lam2 * eta2 * L2 / a;
  A.row(4) << 0, 0, 6 * g * C / r, 0, 0, 6 * eta2 / (g * r);
  A.row(5) << 0, 12 * lam2 / (g * r), 36 * g * lam2 * L2 * C / r, 6 * g * C / r,
      36 * g * lam2 * L2 * C / r, 0;
  for (int i = 0; i < 6; ++i) A(i, i) = 1.0 - s.delta(i);

  s.b1 << 3 * L2 * n * n * eta2 / lam, 3 * L2 * n * eta2 / lam, 6 * eta2 * n / a,
      36 * eta2 * lam2 * L2 * n / a, 0, 36 * eta2 * g * L2 * n / r;
  s.b2 << n, 2 * n, 0, 6 * n / a, 0, 6 * n / (g * r);
  s.q << eta / (n * n), 0, 0, 0, eta * L2 / n, 0;
}

void fill_vr(ConstantSystem& s) {
  const double a = s.alpha, r = s.rho, C = s.C, l = s.L, l2 = l * l;
  const double lam = s.lambda, g = s.gamma, eta = s.eta;
  const double n = static_cast<double>(s.n);
  const double lam2 = lam * lam, g2 = g * g, eta2 = eta * eta;

  s.delta << lam, lam, a / 2 - 6 * C * g2 / a, a / 2 - 6 * C * g2 / a, g * r / 2,
      g * r / 2 - 18 * eta2 * l2 / (g * r);

  Matrix6& A = s.A;
  A.setZero();
  A.row(0) << 0, 0, 3 * C * g2 * l2, 0, 3 * C * g2 * l2, 3 * eta2 * l2;
  A.row(1) << 0, 0, 3 * C * g2 * l2, 0, 3 * C * g2 * l2, 3 * eta2 * l2;
  A.row(2) << 0, 0, 0, 0, 6 * C * g2 / a, 6 * eta2 / a;
  A.row(3) << 0, 6 * lam2 / a, 36 * C * g2 * l2 / a, 0, 36 * C * g2 * l2 / a,
      6 * C * g2 / a + 36 * eta2 * l2 / a;
  A.row(4) << 0, 0, 6 * g * C / r, 0, 0, 6 * eta2 / (g * r);
  A.row(5) << 0, 3 * lam2 / (g * r), 18 * C * g * l2 / r, 6 * C * g / r, 18 * C * g * l2 / r, 0;
  for (int i = 0; i < 6; ++i) A(i, i) = 1.0 - s.delta(i);

  s.b1 << 3 * n * eta2 * l2, 3 * n * eta2 * l2, 6 * n * eta2 / a, 36 * n * eta2 * l2 / a, 0,
      18 * n * eta2 * l2 / (g * r);
  s.b2 << 2 * n, 2 * n, 0, 12 * n / a, 0, 6 * n / (g * r);
  s.q << eta / (n * n), 0, 0, 0, eta * l2 / n, 0;
}

}  // namespace

// ------------------------------------------------------------------ Lyapunov

Vector6 LyapunovBreakdown::components() const {
  Vector6 v;
  v << G_hat, G_tilde, omega1, omega2, omega3, omega4;
  return v;
}

Vector6 phi_weights(std::size_t n, double L, double rho, double tau) {
  const double nd = static_cast<double>(n);
  const double r3 = rho * rho * rho;
  const auto& c = kPhiConstants;
  Vector6 w;
  w << c[0] / (nd * nd * L), c[1] * tau / (nd * L), c[2] * L / (r3 * nd * tau),
      c[3] * tau / (rho * nd * L), c[4] * L / (r3 * nd * tau), c[5] * tau / (rho * nd * L);
  return w;
}

LyapunovBreakdown lyapunov_components(const AlgState& state, const Problem& problem, double rho,
                                      double tau, std::optional<double> f_star) {
  if (!(rho > 0.0) || !(tau > 0.0)) throw ValidationError("rho and tau must be positive");
  const Eigen::MatrixXd grads = problem.exact_grad_matrix(state.X);
  const Eigen::VectorXd x_bar = state.x_bar();
  const Eigen::VectorXd v_bar = state.v_bar();

  LyapunovBreakdown out;
  if (f_star) out.F = problem.loss(x_bar) - *f_star;
  out.G_hat = (grads - state.M).rowwise().sum().squaredNorm();
  out.G_tilde = (grads - state.M).squaredNorm();
  out.omega1 = (state.H - state.X).squaredNorm();
  out.omega2 = (state.G - state.V).squaredNorm();
  out.omega3 = (state.X.colwise() - x_bar).squaredNorm();
  out.omega4 = (state.V.colwise() - v_bar).squaredNorm();
  out.omega5 = v_bar.squaredNorm();
  out.weights = phi_weights(problem.n(), problem.smoothness(), rho, tau);
  out.phi = out.weights.dot(out.components()) + out.F.value_or(0.0);
  return out;
}

// --------------------------------------------------------- constant systems

ConstantFamily parse_constant_family(std::string_view text) {
  const std::string lower = lowercase(text);
  if (lower == "nonconvex") return ConstantFamily::kNonconvex;
  if (lower == "pl") return ConstantFamily::kPl;
  if (lower == "vr") return ConstantFamily::kVr;
  throw ValidationError("unknown constant family '" + std::string(text) +
                        "' (expected nonconvex, pl or vr)");
}

std::string to_string(ConstantFamily family) {
  switch (family) {
    case ConstantFamily::kNonconvex: return "nonconvex";
    case ConstantFamily::kPl: return "pl";
    case ConstantFamily::kVr: return "vr";
  }
  return "?";
}

StepConstants published_step_constants(ConstantFamily family) {
  switch (family) {
    case ConstantFamily::kNonconvex: return {1.0 / 200, 1.0 / 200, 1.0 / 100000};
    case ConstantFamily::kPl: return {1.0 / 200000, 1.0 / 200000, 1.0 / 100000000};
    case ConstantFamily::kVr: return {1.0 / 200, 1.0 / 200, 1.0 / 100000};
  }
  return {};
}

ConstantSystem build_constant_system(ConstantFamily family, double alpha, double rho,
                                     std::size_t n, double tau, std::optional<double> mu_over_L,
                                     std::optional<StepConstants> constants) {
  if (!in_unit(alpha) || !in_unit(rho) || !in_unit(tau))
    throw ValidationError("alpha, rho and tau must lie in (0, 1]");
  if (n == 0) throw ValidationError("n must be >= 1");
  if (family == ConstantFamily::kPl && !(mu_over_L && in_unit(*mu_over_L)))
    throw ValidationError("the pl family needs mu_over_L in (0, 1]");

  ConstantSystem s;
  s.family = family;
  s.alpha = alpha;
  s.rho = rho;
  s.tau = tau;
  s.n = n;
  s.mu_over_L = family == ConstantFamily::kPl ? *mu_over_L : 0.0;

  const StepConstants k = constants.value_or(published_step_constants(family));
  const double nd = static_cast<double>(n);
  const double r3 = rho * rho * rho;
  s.gamma = k.c_gamma * alpha * rho;
  s.eta = k.c_eta * alpha * r3 * tau / s.L;
  s.lambda = family == ConstantFamily::kVr ? k.c_lambda * alpha * alpha * r3 * r3 * tau * tau / nd
                                           : k.c_lambda * alpha * r3 * tau;

  const double L = s.L;
  switch (family) {
    case ConstantFamily::kNonconvex: {
      fill_tracking(s);
      const auto& c = kPhiConstants;
      s.c << c[0] / (nd * nd * L), c[1] * tau / (nd * L), c[2] * L / (r3 * nd * tau),
          c[3] * tau / (rho * nd * L), c[4] * L / (r3 * nd * tau), c[5] * tau / (rho * nd * L);
      break;
    }
    case ConstantFamily::kPl: {
      fill_tracking(s);
      const double b[6] = {1.0 / 250, 13.0 / 200000, 1.0 / 20, 1.0 / 400000, 2.0, 1.0 / 200000};
      s.c << b[0] / (nd * nd * L), b[1] * tau / (nd * L), b[2] * L / (r3 * nd * tau),
          b[3] * tau / (rho * nd * L), b[4] * L / (r3 * nd * tau), b[5] * tau / (rho * nd * L);
      break;
    }
    case ConstantFamily::kVr: {
      fill_vr(s);
      const double d[6] = {0.0020, 0.000065, 0.005, 0.0000025, 0.01, 0.000005};
      s.c << d[0] / (alpha * r3 * nd * tau * L), d[1] / (nd * L), d[2] * L / (r3 * nd * tau),
          d[3] / (rho * nd * L), d[4] * L / (r3 * nd * tau), d[5] / (rho * nd * L);
      break;
    }
  }
  return s;
}

Vector6 ConstantSystem::column_slack() const {
  const double mu_eta = mu_over_L * eta;
  Vector6 out;
  for (int j = 0; j < 6; ++j) {
    double off = 0.0;
    for (int i = 0; i < 6; ++i)
      if (i != j) off += A(i, j) * c(i);
    out(j) = (delta(j) - mu_eta) * c(j) - off - q(j);
  }
  return out;
}

Vector6 ConstantSystem::relative_column_slack() const {
  const double mu_eta = mu_over_L * eta;
  const Vector6 slack = column_slack();
  Vector6 out;
  for (int j = 0; j < 6; ++j) {
    double scale = std::abs(delta(j) * c(j)) + mu_eta * c(j) + std::abs(q(j));
    for (int i = 0; i < 6; ++i)
      if (i != j) scale += std::abs(A(i, j) * c(i));
    out(j) = scale > 0.0 ? slack(j) / scale : 0.0;
  }
  return out;
}

double ConstantSystem::side_value() const { return eta / 2 - eta * eta * L / 2 - b1.dot(c); }

double ConstantSystem::relative_side_value() const {
  const double scale = eta / 2 + eta * eta * L / 2 + b1.cwiseAbs().dot(c.cwiseAbs());
  return scale > 0.0 ? side_value() / scale : 0.0;
}

double ConstantSystem::margin() const {
  return std::min(relative_column_slack().minCoeff(), relative_side_value());
}

std::vector<double> log_space(double lo, double hi, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {hi};
  std::vector<double> out(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t k = 0; k < points; ++k)
    out[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1));
  out.back() = hi;
  return out;
}

ConstantGrid ConstantGrid::standard(std::size_t points) {
  ConstantGrid g;
  g.alpha = log_space(1e-2, 1.0, points);
  g.rho = log_space(1e-3, 1.0, points);
  g.tau = log_space(1e-2, 1.0, points);
  g.n = {1, 4, 64, 1024};
  g.mu_over_L = log_space(1e-3, 1.0, points);
  return g;
}

std::size_t ConstantGrid::size(ConstantFamily family) const {
  std::size_t base = alpha.size() * rho.size() * tau.size() * n.size();
  return family == ConstantFamily::kPl ? base * mu_over_L.size() : base;
}

ConstantVerification verify_descent_constants(
    ConstantFamily family, const ConstantGrid& grid, double c_eta_scale,
    const std::function<void(const GridPoint&, const ConstantSystem&)>& visit) {
  if (grid.size(family) == 0) throw ValidationError("constant grid is empty");
  StepConstants k = published_step_constants(family);
  k.c_eta *= c_eta_scale;

  const std::vector<double> mus =
      family == ConstantFamily::kPl ? grid.mu_over_L : std::vector<double>{0.0};

  ConstantVerification out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (double alpha : grid.alpha)
    for (double rho : grid.rho)
      for (double tau : grid.tau)
        for (std::size_t n : grid.n)
          for (double mu : mus) {
            const ConstantSystem s =
                family == ConstantFamily::kPl
                    ? build_constant_system(family, alpha, rho, n, tau, mu, k)
                    : build_constant_system(family, alpha, rho, n, tau, std::nullopt, k);
            const GridPoint point{alpha, rho, tau, mu, n};
            if (visit) visit(point, s);

            const Vector6 rel = s.relative_column_slack();
            const double side = s.relative_side_value();
            Vector6::Index row = 0;
            double margin = rel.minCoeff(&row);
            int worst_row = static_cast<int>(row);
            if (side < margin) {
              margin = side;
              worst_row = 6;
            }
            ++out.points;
            if (margin < -kConstantTolerance) ++out.failing_points;
            if (margin < out.worst_margin) {
              out.worst_margin = margin;
              out.worst_point = point;
              out.worst_row = worst_row;
            }
          }
  out.pass = out.failing_points == 0;
  return out;
}

// ---------------------------------------------------------------- consensus

ConsensusReport consensus_report(const AlgState& state, const Problem& problem) {
  const Eigen::VectorXd x_bar = state.x_bar();
  const double n = static_cast<double>(state.X.cols());
  const double L = problem.smoothness();

  ConsensusReport r;
  r.omega3_per_node = (state.X.colwise() - x_bar).squaredNorm() / n;
  double total = 0.0;
  for (Eigen::Index c = 0; c < state.X.cols(); ++c)
    total += problem.full_grad(state.X.col(c)).squaredNorm();
  r.mean_local_grad_sq = total / n;
  r.grad_at_mean_sq = problem.full_grad(x_bar).squaredNorm();
  r.bound = 2.0 * L * L * r.omega3_per_node + 2.0 * r.grad_at_mean_sq;
  r.bound_holds = r.mean_local_grad_sq <= r.bound + 1e-9;
  return r;
}

}  // namespace motef
