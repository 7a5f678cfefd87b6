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

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "motef/algorithms.hpp"
#include "motef/problems.hpp"

namespace motef {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

// Weights c_1..c_6 of the nonconvex Lyapunov function.
inline constexpr std::array<double, 6> kPhiConstants = {1.0 / 500,    13.0 / 200000, 1.0 / 20,
                                                        1.0 / 400000, 9.0 / 100,     1.0 / 200000};

/// Error terms of a live state. Components are ordered
/// (G_hat, G_tilde, omega1, omega2, omega3, omega4), the order of `weights`.
struct LyapunovBreakdown {
  std::optional<double> F;  // f(x_bar) - f*
  double G_hat = 0.0;       // ||grad F(X) 1 - M 1||^2
  double G_tilde = 0.0;     // ||grad F(X) - M||_F^2
  double omega1 = 0.0;      // ||H - X||_F^2
  double omega2 = 0.0;      // ||G - V||_F^2
  double omega3 = 0.0;      // ||X - x_bar 1^T||_F^2
  double omega4 = 0.0;      // ||V - v_bar 1^T||_F^2
  double omega5 = 0.0;      // ||v_bar||^2
  Vector6 weights = Vector6::Zero();
  double phi = 0.0;         // F + weights . components (F omitted when unknown)

  Vector6 components() const;
};

// (c1/(n^2 L), c2 tau/(n L), c3 L/(rho^3 n tau), c4 tau/(rho n L),
//  c5 L/(rho^3 n tau), c6 tau/(rho n L)).
Vector6 phi_weights(std::size_t n, double L, double rho, double tau);

LyapunovBreakdown lyapunov_components(const AlgState& state, const Problem& problem, double rho,
                                      double tau, std::optional<double> f_star = std::nullopt);

enum class ConstantFamily { kNonconvex, kPl, kVr };

ConstantFamily parse_constant_family(std::string_view text);
std::string to_string(ConstantFamily family);

struct StepConstants {
  double c_lambda = 0.0;
  double c_gamma = 0.0;
  double c_eta = 0.0;
};

// Published (c_lambda, c_gamma, c_eta) of each family.
StepConstants published_step_constants(ConstantFamily family);

/// Coefficients of the one-step bound Omega^{t+1} <= A Omega^t + b1 Omega5^t +
/// b2 lambda^2 sigma^2 and of the requirement
///   (s I - A^T) c >= q,  b1^T c <= eta/2 - eta^2 L/2,
/// with s = 1 - mu eta for the PL family and s = 1 otherwise. Built with C = 4
/// and L = 1; every row is homogeneous in L.
struct ConstantSystem {
  ConstantFamily family = ConstantFamily::kNonconvex;
  double alpha = 1.0, rho = 1.0, tau = 1.0;
  std::size_t n = 1;
  double mu_over_L = 0.0;  // PL only
  double C = 4.0;
  double L = 1.0;

  Matrix6 A = Matrix6::Zero();
  // A(i, i) = 1 - delta(i); kept separately to avoid cancellation in 1 - A(i, i).
  Vector6 delta = Vector6::Zero();
  Vector6 b1 = Vector6::Zero();
  Vector6 b2 = Vector6::Zero();
  Vector6 q = Vector6::Zero();
  Vector6 c = Vector6::Zero();

  double gamma = 0.0, lambda = 0.0, eta = 0.0;

  // Componentwise (s I - A^T) c - q.
  Vector6 column_slack() const;
  // Same, divided by the magnitude of the terms involved.
  Vector6 relative_column_slack() const;
  // eta/2 - eta^2 L/2 - b1^T c.
  double side_value() const;
  double relative_side_value() const;
  // Smallest relative slack over the seven inequalities.
  double margin() const;
};

/// Throws ValidationError unless alpha, rho, tau are in (0, 1], n >= 1, and
/// (for pl) mu_over_L is in (0, 1]. `constants` overrides the published step
/// constants.
ConstantSystem build_constant_system(ConstantFamily family, double alpha, double rho,
                                     std::size_t n, double tau,
                                     std::optional<double> mu_over_L = std::nullopt,
                                     std::optional<StepConstants> constants = std::nullopt);

struct ConstantGrid {
  std::vector<double> alpha;
  std::vector<double> rho;
  std::vector<double> tau;
  std::vector<std::size_t> n;
  std::vector<double> mu_over_L;  // pl only

  // `points` log-spaced values per axis: alpha, tau in [1e-2, 1], rho in
  // [1e-3, 1], mu_over_L in [1e-3, 1]; n in {1, 4, 64, 1024}.
  static ConstantGrid standard(std::size_t points = 5);
  std::size_t size(ConstantFamily family) const;
};

std::vector<double> log_space(double lo, double hi, std::size_t points);

struct GridPoint {
  double alpha = 0.0, rho = 0.0, tau = 0.0, mu_over_L = 0.0;
  std::size_t n = 0;
};

struct ConstantVerification {
  bool pass = false;
  double worst_margin = 0.0;  // relative
  GridPoint worst_point;
  int worst_row = -1;          // 0..5 column inequality, 6 the side condition
  std::size_t points = 0;
  std::size_t failing_points = 0;
};

// Relative round-off allowance on each inequality. Rows that the published
// constants satisfy with equality sit at this level.
inline constexpr double kConstantTolerance = 1e-12;

/// Checks every grid point; pass iff every relative slack is >= -kConstantTolerance.
/// `c_eta_scale` multiplies c_eta (sensitivity check). `visit`, when set, sees
/// every point with its system.
ConstantVerification verify_descent_constants(
    ConstantFamily family, const ConstantGrid& grid, double c_eta_scale = 1.0,
    const std::function<void(const GridPoint&, const ConstantSystem&)>& visit = {});

struct ConsensusReport {
  double omega3_per_node = 0.0;      // ||X - x_bar 1^T||^2 / n
  double mean_local_grad_sq = 0.0;   // (1/n) sum_i ||grad f(x_i)||^2
  double grad_at_mean_sq = 0.0;      // ||grad f(x_bar)||^2
  double bound = 0.0;                // 2 L^2 omega3 / n + 2 ||grad f(x_bar)||^2
  bool bound_holds = false;          // mean_local_grad_sq <= bound + 1e-9
};

ConsensusReport consensus_report(const AlgState& state, const Problem& problem);

}  // namespace motef
