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
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "motef/random.hpp"

namespace motef {

enum class CompressorFamily { kTopK, kRandK, kGsgd, kIdentity };

// Level rounding for gsgd. Stochastic rounding is unbiased, which makes the
// 1/omega-scaled quantizer contractive in expectation for every d and b.
// Nearest rounding is deterministic but loses the guarantee once most
// coordinates fall below half a level (roughly d > 4 s^2).
enum class GsgdRounding { kStochastic, kNearest };

/// A contractive compression operator: E||C(x) - x||^2 <= (1 - alpha) ||x||^2.
struct CompressorSpec {
  CompressorFamily family = CompressorFamily::kIdentity;
  std::size_t k = 0;  // kept coordinates (top_k, rand_k)
  unsigned b = 0;     // bits per coordinate (gsgd)
  GsgdRounding rounding = GsgdRounding::kStochastic;
  std::size_t d = 0;  // dimension the operator is applied to

  static CompressorSpec top_k(std::size_t k, std::size_t d);
  static CompressorSpec rand_k(std::size_t k, std::size_t d);
  static CompressorSpec gsgd(unsigned b, std::size_t d,
                             GsgdRounding rounding = GsgdRounding::kStochastic);
  static CompressorSpec identity(std::size_t d);

  // Throws ValidationError when k > d, k == 0, b < 2, or d == 0.
  void validate() const;

  bool randomized() const noexcept {
    return family == CompressorFamily::kRandK ||
           (family == CompressorFamily::kGsgd && rounding == GsgdRounding::kStochastic);
  }
};

/// Parses `topk:K`, `randk:K`, `gsgd:B`, `gsgd_nearest:B` or `identity`
/// (case-insensitive).
CompressorSpec parse_compressor(std::string_view text, std::size_t d);
std::string to_string(const CompressorSpec& spec);

struct CompressedMessage {
  Eigen::VectorXd payload;  // decompressed value C(x)
  std::uint64_t bits = 0;   // transmitted size
};

double alpha_of(const CompressorSpec& spec);

// Bits charged for one message; independent of the input values.
std::uint64_t message_bits(const CompressorSpec& spec);

// Ceil(log2(d)), the index width used in sparse messages.
unsigned index_bits(std::size_t d);

CompressedMessage compress(const CompressorSpec& spec, std::span<const double> x, Rng& rng);

// Writes C(x) into `out` (length d) and returns the bit cost; no allocation
// for deterministic families.
std::uint64_t compress_into(const CompressorSpec& spec, std::span<const double> x,
                            std::span<double> out, Rng& rng);

/// Monte Carlo estimate of the contraction ratio ||C(x) - x||^2 / ||x||^2 over
/// standard-normal inputs. Deterministic families report the per-sample
/// maximum; randomized ones average `inner_samples` draws per input.
struct ContractionEstimate {
  double max_ratio = 0.0;          // max over inputs of the per-input (mean) ratio
  double max_ratio_stderr = 0.0;   // standard error of that worst mean; 0 if deterministic
  double mean_ratio = 0.0;         // pooled over every (input, draw) pair
  double mean_ratio_stderr = 0.0;
  double bound = 0.0;              // 1 - alpha
  // Deterministic: max_ratio <= bound. Randomized: pooled mean within 3 standard
  // errors of the bound, and the worst per-input mean within
  // (3 + sqrt(2 ln trials)) standard errors (the max of `trials` means).
  bool holds = false;
};

ContractionEstimate verify_contractive(const CompressorSpec& spec, std::size_t trials, Rng& rng,
                                       std::size_t inner_samples = 1000);

}  // namespace motef
