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

#include "motef/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>

#include "motef/compressors.hpp"
#include "motef/errors.hpp"

namespace motef {
namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  return text;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ParseError(0, "invalid value '" + std::string(value) + "' for '" + std::string(key) +
                          "' (expected " + expected + ")");
}

double to_double(std::string_view key, std::string_view value) {
  std::string_view v = value;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, value, "a number");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    bad_value(key, value, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_uint(key, value));
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = lowercase(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, value, "true or false");
}

// Rethrows enum parse failures as ParseError so the caller can attach a line.
template <typename F>
auto parse_enum(std::string_view key, std::string_view value, F&& parse) {
  try {
    return parse(value);
  } catch (const ValidationError& e) {
    throw ParseError(0, std::string(key) + ": " + e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"algorithm",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.algorithm = parse_enum(k, v, parse_algorithm);
       }},
      {"problem",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.problem = parse_enum(k, v, parse_problem_kind);
       }},
      {"d", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.d = to_size(k, v); }},
      {"zeta",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.zeta = to_double(k, v); }},
      {"sigma",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.sigma = to_double(k, v); }},
      {"data_path",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.data_path = std::string(v); }},
      {"test_path",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.test_path = std::string(v); }},
      {"reg_lambda",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.reg_lambda = to_double(k, v);
       }},
      {"shuffle",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.shuffle = to_bool(k, v); }},
      {"topology",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.topology = parse_enum(k, v, parse_graph_kind);
       }},
      {"n", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.n = to_size(k, v); }},
      {"p",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.graph.p = to_double(k, v); }},
      {"degree",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.graph.degree = to_size(k, v);
       }},
      {"rows",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.graph.rows = to_size(k, v); }},
      {"cols",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.graph.cols = to_size(k, v); }},
      {"lazy",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.graph.lazy = to_bool(k, v); }},
      {"compressor",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.compressor = std::string(v); }},
      {"gamma",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.hp.gamma = to_double(k, v); }},
      {"eta",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.hp.eta = to_double(k, v); }},
      {"lambda_momentum",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.hp.lambda_momentum = to_double(k, v);
       }},
      {"batch",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.hp.batch = to_size(k, v); }},
      {"init_batch",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.hp.init_batch = to_size(k, v);
       }},
      {"iters",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.hp.iters = to_size(k, v); }},
      {"eval_every",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.eval_every = to_size(k, v);
       }},
      {"seed",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.seed = to_uint(k, v); }},
      {"x0",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.x0 = parse_enum(k, v, parse_init_kind);
       }},
      {"output",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output = std::string(v); }},
  };
  return table;
}

}  // namespace

ProblemKind parse_problem_kind(std::string_view text) {
  const std::string lower = lowercase(text);
  if (lower == "synthetic") return ProblemKind::kSynthetic;
  if (lower == "logreg") return ProblemKind::kLogReg;
  throw ValidationError("unknown problem '" + std::string(text) + "' (expected synthetic or logreg)");
}

std::string to_string(ProblemKind kind) {
  return kind == ProblemKind::kSynthetic ? "synthetic" : "logreg";
}

InitKind parse_init_kind(std::string_view text) {
  const std::string lower = lowercase(text);
  if (lower == "zeros") return InitKind::kZeros;
  if (lower == "ones") return InitKind::kOnes;
  if (lower == "gaussian") return InitKind::kGaussian;
  throw ValidationError("unknown x0 '" + std::string(text) + "' (expected zeros, ones or gaussian)");
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::kZeros: return "zeros";
    case InitKind::kOnes: return "ones";
    case InitKind::kGaussian: return "gaussian";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  hp.validate();
  if (n == 0) throw ValidationError("n must be >= 1");
  if (eval_every == 0) throw ValidationError("eval_every must be >= 1");
  if (problem == ProblemKind::kSynthetic) {
    if (d == 0) throw ValidationError("d must be >= 1");
    if (zeta < 0.0) throw ValidationError("zeta must be >= 0");
    if (sigma < 0.0) throw ValidationError("sigma must be >= 0");
  } else {
    if (data_path.empty()) throw ValidationError("logreg needs data_path");
    if (reg_lambda < 0.0) throw ValidationError("reg_lambda must be >= 0");
  }
  if (topology == GraphKind::kErdosRenyi && !(graph.p > 0.0 && graph.p <= 1.0))
    throw ValidationError("p must lie in (0, 1]");
  if (output.empty()) throw ValidationError("output must not be empty");
  if (problem == ProblemKind::kSynthetic) parse_compressor(compressor, d).validate();
}

bool is_config_key(std::string_view key) { return setters().count(key) != 0; }

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ParseError(0, "unknown key '" + std::string(key) + "'");
  it->second(config, key, value);
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(body.substr(0, eq));
    const std::string_view value = trim(body.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key before '='");
    if (!is_config_key(key)) throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second)
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + std::string(key) + "'");
    try {
      set_config_value(config, key, value);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      if (key == "gamma" || key == "eta" || key == "lambda_momentum" || key == "batch" ||
          key == "init_batch") {
        config.hp.validate();
      } else if ((key == "n" && config.n == 0) || (key == "eval_every" && config.eval_every == 0) ||
                 (key == "d" && config.d == 0)) {
        throw ValidationError(std::string(key) + " must be >= 1");
      } else if ((key == "zeta" && config.zeta < 0.0) || (key == "sigma" && config.sigma < 0.0) ||
                 (key == "reg_lambda" && config.reg_lambda < 0.0)) {
        throw ValidationError(std::string(key) + " must be >= 0");
      } else if (key == "p" && !(config.graph.p > 0.0 && config.graph.p <= 1.0)) {
        throw ValidationError("p must lie in (0, 1]");
      }
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  const char* required[] = {"algorithm", "problem", "topology", "n", "eta", "iters"};
  for (const char* key : required)
    if (!seen.count(key)) throw ParseError(0, std::string("missing required key '") + key + "'");
  if (config.problem == ProblemKind::kSynthetic && !seen.count("d"))
    throw ParseError(0, "missing required key 'd'");
  if (config.problem == ProblemKind::kLogReg && !seen.count("data_path"))
    throw ParseError(0, "missing required key 'data_path'");

  if (!base_dir.empty()) {
    if (!config.data_path.empty() && config.data_path.is_relative())
      config.data_path = base_dir / config.data_path;
    if (!config.test_path.empty() && config.test_path.is_relative())
      config.test_path = base_dir / config.test_path;
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  ExperimentConfig config = parse_config(in, path.parent_path());
  if (config.problem == ProblemKind::kLogReg) {
    if (!std::filesystem::exists(config.data_path))
      throw ValidationError("data_path '" + config.data_path.string() + "' does not exist");
    if (!config.test_path.empty() && !std::filesystem::exists(config.test_path))
      throw ValidationError("test_path '" + config.test_path.string() + "' does not exist");
  }
  return config;
}

}  // namespace motef
