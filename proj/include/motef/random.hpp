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

#include <cstdint>
#include <random>

namespace motef {

using Rng = std::mt19937_64;

// Tags separating the independent random streams a simulation draws from.
enum class Purpose : std::uint64_t {
  kInit = 1,
  kGradient = 2,
  kMomentum = 3,
  kCompressH = 4,
  kCompressG = 5,
  kCompressChoco = 6,
  kTopology = 7,
  kProblem = 8,
  kShuffle = 9,
  kMonteCarlo = 10,
};

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Hash of (seed, a, b, c) used to seed one stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Factory of per-(client, round, purpose) generators. Every draw a client makes
/// in a round comes from its own stream, so results do not depend on the order
/// in which clients are processed.
class RandomStreams {
 public:
  explicit RandomStreams(std::uint64_t seed) noexcept : seed_(seed) {}

  Rng stream(std::uint64_t client, std::uint64_t round, Purpose purpose) const {
    return Rng(derive_seed(seed_, client, round, static_cast<std::uint64_t>(purpose)));
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace motef
