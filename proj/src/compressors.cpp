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

#include "motef/compressors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <vector>

#include "motef/errors.hpp"

namespace motef {
namespace {

constexpr unsigned kFloatBits = 32;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ValidationError("compressor: bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

double gsgd_omega(std::size_t d, unsigned b) {
  const double s = std::ldexp(1.0, static_cast<int>(b) - 1);
  const double dd = static_cast<double>(d);
  return 1.0 + std::min(dd / (s * s), std::sqrt(dd) / s);
}

std::vector<std::size_t>& scratch_indices(std::size_t d) {
  thread_local std::vector<std::size_t> idx;
  idx.resize(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

void top_k_into(std::span<const double> x, std::size_t k, std::span<double> out) {
  const std::size_t d = x.size();
  std::fill(out.begin(), out.end(), 0.0);
  if (k == 0) return;
  if (k >= d) {
    std::copy(x.begin(), x.end(), out.begin());
    return;
  }
  auto& idx = scratch_indices(d);
  // Strict total order: larger magnitude first, lower index on ties.
  auto before = [&x](std::size_t a, std::size_t b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), before);
  for (std::size_t j = 0; j < k; ++j) out[idx[j]] = x[idx[j]];
}

void rand_k_into(std::span<const double> x, std::size_t k, std::span<double> out, Rng& rng) {
  const std::size_t d = x.size();
  std::fill(out.begin(), out.end(), 0.0);
  auto& idx = scratch_indices(d);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t j = 0; j < std::min(k, d); ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, d - 1);
    std::swap(idx[j], idx[pick(rng)]);
    out[idx[j]] = x[idx[j]];
  }
}

void gsgd_into(std::span<const double> x, unsigned b, GsgdRounding rounding,
               std::span<double> out, Rng& rng) {
  double norm_sq = 0.0;
  for (double v : x) norm_sq += v * v;
  if (norm_sq == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double norm = std::sqrt(norm_sq);
  const double s = std::ldexp(1.0, static_cast<int>(b) - 1);
  const double scale = norm / (s * gsgd_omega(x.size(), b));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double level = s * std::abs(x[j]) / norm;
    double q = 0.0;
    if (rounding == GsgdRounding::kNearest) {
      q = std::round(level);
    } else {
      const double lo = std::floor(level);
      q = lo + (unit(rng) < level - lo ? 1.0 : 0.0);
    }
    out[j] = x[j] < 0.0 ? -scale * q : scale * q;
  }
}

}  // namespace

CompressorSpec CompressorSpec::top_k(std::size_t k, std::size_t d) {
  CompressorSpec spec{CompressorFamily::kTopK, k, 0, GsgdRounding::kStochastic, d};
  spec.validate();
  return spec;
}

CompressorSpec CompressorSpec::rand_k(std::size_t k, std::size_t d) {
  CompressorSpec spec{CompressorFamily::kRandK, k, 0, GsgdRounding::kStochastic, d};
  spec.validate();
  return spec;
}

CompressorSpec CompressorSpec::gsgd(unsigned b, std::size_t d, GsgdRounding rounding) {
  CompressorSpec spec{CompressorFamily::kGsgd, 0, b, rounding, d};
  spec.validate();
  return spec;
}

CompressorSpec CompressorSpec::identity(std::size_t d) {
  CompressorSpec spec{CompressorFamily::kIdentity, 0, 0, GsgdRounding::kStochastic, d};
  spec.validate();
  return spec;
}

void CompressorSpec::validate() const {
  if (d == 0) throw ValidationError("compressor: dimension must be positive");
  switch (family) {
    case CompressorFamily::kTopK:
    case CompressorFamily::kRandK:
      if (k == 0 || k > d)
        throw ValidationError("compressor: need 1 <= k <= d (k=" + std::to_string(k) +
                              ", d=" + std::to_string(d) + ")");
      break;
    case CompressorFamily::kGsgd:
      if (b < 2 || b > 32) throw ValidationError("compressor: gsgd needs 2 <= b <= 32");
      break;
    case CompressorFamily::kIdentity:
      break;
  }
}

CompressorSpec parse_compressor(std::string_view text, std::size_t d) {
  const auto key = lower(text);
  if (key == "identity" || key == "none") return CompressorSpec::identity(d);
  const auto colon = key.find(':');
  if (colon == std::string::npos)
    throw ValidationError("compressor: expected family:parameter, got '" + std::string(text) + "'");
  const std::string_view family(key.data(), colon);
  const std::string_view arg(key.data() + colon + 1, key.size() - colon - 1);
  if (family == "topk") return CompressorSpec::top_k(parse_count(arg, "K"), d);
  if (family == "randk") return CompressorSpec::rand_k(parse_count(arg, "K"), d);
  if (family == "gsgd")
    return CompressorSpec::gsgd(static_cast<unsigned>(parse_count(arg, "B")), d);
  if (family == "gsgd_nearest")
    return CompressorSpec::gsgd(static_cast<unsigned>(parse_count(arg, "B")), d,
                                GsgdRounding::kNearest);
  throw ValidationError("compressor: unknown family '" + std::string(family) + "'");
}

std::string to_string(const CompressorSpec& spec) {
  switch (spec.family) {
    case CompressorFamily::kTopK: return "topk:" + std::to_string(spec.k);
    case CompressorFamily::kRandK: return "randk:" + std::to_string(spec.k);
    case CompressorFamily::kGsgd:
      return (spec.rounding == GsgdRounding::kNearest ? "gsgd_nearest:" : "gsgd:") +
             std::to_string(spec.b);
    case CompressorFamily::kIdentity: return "identity";
  }
  return "unknown";
}

double alpha_of(const CompressorSpec& spec) {
  switch (spec.family) {
    case CompressorFamily::kTopK:
    case CompressorFamily::kRandK:
      return static_cast<double>(spec.k) / static_cast<double>(spec.d);
    case CompressorFamily::kGsgd:
      return 1.0 / gsgd_omega(spec.d, spec.b);
    case CompressorFamily::kIdentity:
      return 1.0;
  }
  return 1.0;
}

unsigned index_bits(std::size_t d) {
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < d) ++bits;
  return bits;
}

std::uint64_t message_bits(const CompressorSpec& spec) {
  switch (spec.family) {
    case CompressorFamily::kTopK:
    case CompressorFamily::kRandK:
      return static_cast<std::uint64_t>(spec.k) * (kFloatBits + index_bits(spec.d));
    case CompressorFamily::kGsgd:
      return kFloatBits + static_cast<std::uint64_t>(spec.d) * spec.b;
    case CompressorFamily::kIdentity:
      return static_cast<std::uint64_t>(kFloatBits) * spec.d;
  }
  return 0;
}

std::uint64_t compress_into(const CompressorSpec& spec, std::span<const double> x,
                            std::span<double> out, Rng& rng) {
  if (x.size() != spec.d || out.size() != spec.d)
    throw ValidationError("compress: input length " + std::to_string(x.size()) +
                          " does not match d=" + std::to_string(spec.d));
  switch (spec.family) {
    case CompressorFamily::kTopK:
      top_k_into(x, spec.k, out);
      break;
    case CompressorFamily::kRandK:
      rand_k_into(x, spec.k, out, rng);
      break;
    case CompressorFamily::kGsgd:
      gsgd_into(x, spec.b, spec.rounding, out, rng);
      break;
    case CompressorFamily::kIdentity:
      std::copy(x.begin(), x.end(), out.begin());
      break;
  }
  return message_bits(spec);
}

CompressedMessage compress(const CompressorSpec& spec, std::span<const double> x, Rng& rng) {
  CompressedMessage msg;
  msg.payload.resize(static_cast<Eigen::Index>(x.size()));
  msg.bits = compress_into(spec, x, {msg.payload.data(), x.size()}, rng);
  return msg;
}

ContractionEstimate verify_contractive(const CompressorSpec& spec, std::size_t trials, Rng& rng,
                                       std::size_t inner_samples) {
  if (trials == 0) throw ValidationError("verify_contractive: trials must be >= 1");
  spec.validate();
  ContractionEstimate est;
  est.bound = 1.0 - alpha_of(spec);
  est.max_ratio = -1.0;
  const bool random = spec.randomized();
  const std::size_t inner = random ? std::max<std::size_t>(inner_samples, 1000) : 1;

  std::normal_distribution<double> normal;
  std::vector<double> x(spec.d), y(spec.d);
  double pooled = 0.0, pooled_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double norm_sq = 0.0;
    for (auto& v : x) {
      v = normal(rng);
      norm_sq += v * v;
    }
    if (norm_sq == 0.0) continue;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < inner; ++r) {
      compress_into(spec, x, y, rng);
      double err = 0.0;
      for (std::size_t j = 0; j < spec.d; ++j) err += (y[j] - x[j]) * (y[j] - x[j]);
      const double ratio = err / norm_sq;
      sum += ratio;
      sum_sq += ratio * ratio;
    }
    pooled += sum;
    pooled_sq += sum_sq;
    count += inner;
    const double mean = sum / static_cast<double>(inner);
    double se = 0.0;
    if (inner > 1) {
      const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(inner - 1));
      se = std::sqrt(var / static_cast<double>(inner));
    }
    if (mean > est.max_ratio) {
      est.max_ratio = mean;
      est.max_ratio_stderr = se;
    }
  }
  if (count > 0) {
    est.mean_ratio = pooled / static_cast<double>(count);
    if (count > 1) {
      const double var = std::max(
          0.0, (pooled_sq - pooled * est.mean_ratio) / static_cast<double>(count - 1));
      est.mean_ratio_stderr = std::sqrt(var / static_cast<double>(count));
    }
  }
  if (!random) {
    est.holds = est.max_ratio <= est.bound + 1e-12;
  } else {
    const double z_max = 3.0 + std::sqrt(2.0 * std::log(static_cast<double>(trials)));
    est.holds = est.mean_ratio <= est.bound + 3.0 * est.mean_ratio_stderr + 1e-12 &&
                est.max_ratio <= est.bound + z_max * est.max_ratio_stderr + 1e-12;
  }
  return est;
}

}  // namespace motef
