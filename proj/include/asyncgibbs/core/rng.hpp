/*
 * Copyright 2026 The asyncgibbs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <limits>

namespace asyncgibbs {

/// Counter-based generator: the n-th output is a fixed mix of (key, n), so any
/// stream can be reproduced from its seed alone and skipped ahead in O(1).
/// Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  /// Gamma with the given shape and scale (mean shape * scale).
  double gamma(double shape, double scale);
  double chi_squared(double dof);
  /// True with probability p.
  bool bernoulli(double p);
  double exponential(double rate);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// seed = master ^ worker_id, so each worker's stream is reproducible on its own.
inline std::uint64_t worker_seed(std::uint64_t master_seed, std::size_t worker_id) {
  return master_seed ^ static_cast<std::uint64_t>(worker_id);
}

// Stream indices used by the engine; distinct streams never overlap in practice
// (each owns 2^48 counter values).
enum RngStream : std::uint64_t {
  kSamplingStream = 0,
  kReservoirStream = 1,
  kNetworkStream = 2,
  kDataStream = 3,
  kMergeStream = 4,
};

}  // namespace asyncgibbs
