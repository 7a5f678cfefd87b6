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

#include "motef/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "motef/errors.hpp"
#include "motef/libsvm.hpp"

namespace motef {
namespace {

std::size_t tail_start(std::size_t count) {
  const std::size_t window = std::max<std::size_t>(1, (count + 9) / 10);
  return count - std::min(count, window);
}

std::string sanitize(std::string_view text) {
  std::string out;
  for (char ch : text)
    out.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ? ch : '_');
  return out;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  body(out);
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << r.bits_cum << ',' << format_number(r.grad_norm_sq) << ','
        << format_number(r.consensus) << ',' << format_number(r.loss) << ',';
    if (r.subopt) out << format_number(*r.subopt);
    out << ',';
    if (r.test_acc) out << format_number(*r.test_acc);
    out << '\n';
  }
}

double steady_state(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw ValidationError("no records");
  const std::size_t start = tail_start(records.size());
  double total = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) total += records[i].grad_norm_sq;
  return total / static_cast<double>(records.size() - start);
}

std::optional<double> steady_state_subopt(const std::vector<MetricsRecord>& records) {
  if (records.empty()) return std::nullopt;
  const std::size_t start = tail_start(records.size());
  double total = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) {
    if (!records[i].subopt) return std::nullopt;
    total += *records[i].subopt;
  }
  return total / static_cast<double>(records.size() - start);
}

std::unique_ptr<Problem> build_problem(const ExperimentConfig& config) {
  if (config.problem == ProblemKind::kSynthetic)
    return std::make_unique<SyntheticLeastSquares>(config.n, config.d, config.zeta, config.sigma,
                                                   config.seed);

  const LibSVMDataset train = load_libsvm(config.data_path);
  std::optional<LibSVMDataset> test;
  if (!config.test_path.empty()) test = load_libsvm(config.test_path);
  const std::size_t d = std::max(train.d, test ? test->d : 0);
  auto problem = std::make_unique<LogisticRegressionNC>(
      shard(train, config.n, config.shuffle, config.seed), config.reg_lambda, d);
  if (test) problem->set_test_set(*test);
  return problem;
}

Topology build_topology(const ExperimentConfig& config) {
  return build_topology(config.topology, config.n, config.graph,
                        derive_seed(config.seed, static_cast<std::uint64_t>(Purpose::kTopology)));
}

Eigen::VectorXd initial_point(const ExperimentConfig& config, std::size_t d) {
  const auto size = static_cast<Eigen::Index>(d);
  switch (config.x0) {
    case InitKind::kZeros: return Eigen::VectorXd::Zero(size);
    case InitKind::kOnes: return Eigen::VectorXd::Ones(size);
    case InitKind::kGaussian: {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(Purpose::kInit), 1));
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::VectorXd x(size);
      for (Eigen::Index j = 0; j < size; ++j) x(j) = normal(rng);
      return x;
    }
  }
  return Eigen::VectorXd::Zero(size);
}

std::filesystem::path resolve_output(const std::filesystem::path& output) {
  const char* dir = std::getenv(kOutputDirEnv);
  if (dir == nullptr || *dir == '\0') return output;
  return std::filesystem::path(dir) / output.filename();
}

RunResult run_experiment(const ExperimentConfig& config, bool write) {
  config.validate();
  const std::unique_ptr<Problem> problem = build_problem(config);
  const Topology topo = build_topology(config);
  const CompressorSpec compressor = parse_compressor(config.compressor, problem->d());

  RunOptions options;
  options.kind = config.algorithm;
  options.eval_every = config.eval_every;
  options.seed = config.seed;
  options.x0 = initial_point(config, problem->d());

  RunResult result;
  result.records = run(*problem, topo, compressor, config.hp, options);
  result.steady_grad_norm_sq = steady_state(result.records);
  result.steady_subopt = steady_state_subopt(result.records);
  if (write) {
    result.csv = resolve_output(config.output);
    write_file(result.csv, [&](std::ostream& out) { write_csv(out, result.records); });
  }
  return result;
}

bool is_sweep_axis(std::string_view key) {
  static const char* axes[] = {"n",   "lambda_momentum", "zeta",       "sigma",    "gamma",
                               "eta", "topology",        "compressor", "algorithm"};
  return std::any_of(std::begin(axes), std::end(axes), [&](const char* a) { return key == a; });
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

SweepResult sweep(const ExperimentConfig& base, const std::string& axis,
                  const std::vector<std::string>& values, bool parallel, bool write) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  if (!is_sweep_axis(axis)) throw ValidationError("'" + axis + "' is not a sweepable key");

  SweepResult result;
  result.axis = axis;
  result.entries.resize(values.size());

  const std::filesystem::path stem = base.output.stem();
  auto run_one = [&](std::size_t index) {
    SweepEntry& entry = result.entries[index];
    entry.value = values[index];
    entry.seed = base.seed ^ static_cast<std::uint64_t>(index);
    try {
      ExperimentConfig config = base;
      set_config_value(config, axis, values[index]);
      config.seed = entry.seed;
      config.output = base.output.parent_path() /
                      (stem.string() + "_" + axis + "_" + sanitize(values[index]) + ".csv");
      const RunResult run = run_experiment(config, write);
      entry.steady_grad_norm_sq = run.steady_grad_norm_sq;
      entry.steady_subopt = run.steady_subopt;
      entry.records = run.records.size();
      entry.csv = run.csv;
      entry.ok = true;
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.error = e.what();
    }
  };

  if (parallel && values.size() > 1) {
    const std::size_t workers =
        std::min<std::size_t>(values.size(), std::max(2u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < values.size(); i = next++) run_one(i);
      });
    for (auto& t : pool) t.join();
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
  }

  if (write) {
    result.summary = resolve_output(base.output.parent_path() /
                                    (stem.string() + "_" + axis + "_summary.csv"));
    write_file(result.summary, [&](std::ostream& out) { write_sweep_summary(out, result); });
  }
  return result;
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
  out << result.axis << ",seed,status,steady_grad_norm_sq,steady_subopt,records,error\n";
  for (const auto& e : result.entries) {
    out << e.value << ',' << e.seed << ',' << (e.ok ? "ok" : "failed") << ',';
    if (e.ok) out << format_number(e.steady_grad_norm_sq);
    out << ',';
    if (e.ok && e.steady_subopt) out << format_number(*e.steady_subopt);
    out << ',' << e.records << ',';
    std::string error = e.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << error << '\n';
  }
}

}  // namespace motef
