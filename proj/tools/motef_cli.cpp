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

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "motef/diagnostics.hpp"
#include "motef/errors.hpp"
#include "motef/harness.hpp"
#include "motef/topology.hpp"

namespace {

using namespace motef;

int cmd_run(const std::string& config_path) {
  const ExperimentConfig config = load_config(config_path);
  const RunResult result = run_experiment(config);
  const MetricsRecord& last = result.records.back();
  std::cout << "wrote " << result.csv.string() << " records=" << result.records.size()
            << " t=" << last.t << " bits_cum=" << last.bits_cum
            << " grad_norm_sq=" << format_number(last.grad_norm_sq)
            << " steady_grad_norm_sq=" << format_number(result.steady_grad_norm_sq);
  if (result.steady_subopt) std::cout << " steady_subopt=" << format_number(*result.steady_subopt);
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              bool parallel) {
  const ExperimentConfig config = load_config(config_path);
  const SweepResult result = sweep(config, axis, split_list(values), parallel);
  write_sweep_summary(std::cout, result);
  std::cout << "summary " << result.summary.string() << '\n';
  for (const auto& e : result.entries)
    if (!e.ok) return 1;
  return 0;
}

int cmd_verify(const std::string& family_name, std::size_t points, double c_eta_scale,
               const std::string& csv_path) {
  const ConstantFamily family = parse_constant_family(family_name);
  const ConstantGrid grid = ConstantGrid::standard(points);

  std::ofstream csv;
  if (!csv_path.empty()) {
    const auto path = resolve_output(csv_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    csv.open(path);
    if (!csv) throw ValidationError("cannot write '" + path.string() + "'");
    csv << "alpha,rho,tau,n,mu_over_L,gamma,lambda,eta,margin\n";
  }
  const auto visit = [&](const GridPoint& p, const ConstantSystem& s) {
    if (!csv.is_open()) return;
    csv << format_number(p.alpha) << ',' << format_number(p.rho) << ',' << format_number(p.tau)
        << ',' << p.n << ',' << format_number(p.mu_over_L) << ',' << format_number(s.gamma) << ','
        << format_number(s.lambda) << ',' << format_number(s.eta) << ','
        << format_number(s.margin()) << '\n';
  };
  const ConstantVerification v = verify_descent_constants(family, grid, c_eta_scale, visit);

  static const char* rows[] = {"G_hat", "G_tilde", "omega1", "omega2", "omega3", "omega4", "side"};
  const GridPoint& w = v.worst_point;
  std::cout << "family=" << to_string(family) << " points=" << v.points
            << " failing=" << v.failing_points << " pass=" << (v.pass ? "true" : "false")
            << " worst_margin=" << format_number(v.worst_margin)
            << " worst_row=" << (v.worst_row >= 0 ? rows[v.worst_row] : "none")
            << " worst_point=alpha:" << format_number(w.alpha) << ",rho:" << format_number(w.rho)
            << ",tau:" << format_number(w.tau) << ",n:" << w.n;
  if (family == ConstantFamily::kPl) std::cout << ",mu_over_L:" << format_number(w.mu_over_L);
  std::cout << '\n';
  return v.pass ? 0 : 1;
}

int cmd_topology(const std::string& kind, std::size_t n, const GraphParams& params,
                 std::uint64_t seed, const std::string& csv_path) {
  const Topology topo = build_topology(parse_graph_kind(kind), n, params, seed);
  const MixingReport report = validate_mixing(topo.W());
  std::size_t min_deg = n, max_deg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    min_deg = std::min(min_deg, topo.degree(i));
    max_deg = std::max(max_deg, topo.degree(i));
  }
  std::cout << "kind=" << to_string(topo.kind()) << " n=" << n << " edges=" << topo.edge_count()
            << " degree=" << min_deg << ".." << max_deg
            << " weighting=" << to_string(topo.weighting()) << " rho=" << format_number(topo.rho())
            << " sigma_max_sq=" << format_number(report.sigma_max_sq)
            << " symmetry_defect=" << format_number(report.symmetry_defect)
            << " row_sum_defect=" << format_number(report.row_sum_defect)
            << " col_sum_defect=" << format_number(report.col_sum_defect)
            << " valid=" << (report.pass ? "true" : "false") << '\n';
  if (!csv_path.empty()) {
    const auto path = resolve_output(csv_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    write_mixing_csv(out, topo.W());
  }
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized optimization simulator with compressed communication"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment and write its CSV");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::string axis, values;
  bool parallel = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config once per value of one key");
  sweep_cmd->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--axis", axis, "Key to vary")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();
  sweep_cmd->add_flag("--parallel", parallel, "Run values concurrently");

  std::string family;
  std::size_t points = 5;
  double c_eta_scale = 1.0;
  std::string csv_path;
  auto* verify = app.add_subcommand("verify-constants", "Check a descent-constant system on a grid");
  verify->add_option("--family", family, "nonconvex, pl or vr")
      ->required()
      ->check(CLI::IsMember({"nonconvex", "pl", "vr"}));
  verify->add_option("--points", points, "Grid points per axis")->check(CLI::PositiveNumber);
  verify->add_option("--c-eta-scale", c_eta_scale, "Multiply c_eta (sensitivity check)");
  verify->add_option("--csv", csv_path, "Write every grid point to this CSV");

  std::string kind;
  std::size_t n = 0;
  GraphParams params;
  std::uint64_t seed = 0;
  auto* topo = app.add_subcommand("topology-report", "Build a graph and report its mixing matrix");
  topo->add_option("--kind", kind, "complete, ring, star, grid, erdos_renyi, random_regular")
      ->required();
  topo->add_option("--n", n, "Node count")->required()->check(CLI::PositiveNumber);
  topo->add_option("--p", params.p, "Edge probability (erdos_renyi)");
  topo->add_option("--degree", params.degree, "Degree (random_regular)");
  topo->add_option("--rows", params.rows, "Grid rows");
  topo->add_option("--cols", params.cols, "Grid columns");
  topo->add_flag("--lazy", params.lazy, "Use (W + I) / 2");
  topo->add_option("--seed", seed, "Seed for random families");
  topo->add_option("--csv", csv_path, "Write W to this CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*sweep_cmd) return cmd_sweep(config_path, axis, values, parallel);
    if (*verify) return cmd_verify(family, points, c_eta_scale, csv_path);
    if (*topo) return cmd_topology(kind, n, params, seed, csv_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
