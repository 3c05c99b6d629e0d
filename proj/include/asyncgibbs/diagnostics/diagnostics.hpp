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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asyncgibbs/core/rng.hpp"
#include "asyncgibbs/core/value.hpp"

namespace asyncgibbs {

/// One recorded Metropolis-Hastings acceptance probability.
struct MhRecord {
  double alpha = 1.0;
  WorkerId worker = 0;
  CoordinateId coord;
};

/// Uniform fixed-size sample of a stream (Algorithm R).
template <typename T>
class Reservoir {
 public:
  explicit Reservoir(std::size_t capacity = 10000) : capacity_(capacity) {}

  void offer(T item, Rng& rng) {
    ++seen_;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
      return;
    }
    const std::uint64_t j = rng() % seen_;
    if (j < capacity_) items_[j] = std::move(item);
  }

  /// Combines two reservoirs into a uniform sample of the union of their
  /// streams: each slot is drawn from a source with probability proportional
  /// to that source's remaining unsampled population.
  static Reservoir merge(const Reservoir& a, const Reservoir& b, Rng& rng) {
    Reservoir out(std::max(a.capacity_, b.capacity_));
    out.seen_ = a.seen_ + b.seen_;
    std::vector<T> pool_a = a.items_;
    std::vector<T> pool_b = b.items_;
    std::uint64_t left_a = a.seen_;
    std::uint64_t left_b = b.seen_;
    const std::size_t take = static_cast<std::size_t>(
        std::min<std::uint64_t>(out.capacity_, out.seen_));
    while (out.items_.size() < take && (!pool_a.empty() || !pool_b.empty())) {
      const bool from_a = pool_b.empty() ||
                          (!pool_a.empty() && rng() % (left_a + left_b) < left_a);
      auto& pool = from_a ? pool_a : pool_b;
      auto& left = from_a ? left_a : left_b;
      const std::size_t k = static_cast<std::size_t>(rng() % pool.size());
      out.items_.push_back(std::move(pool[k]));
      pool[k] = std::move(pool.back());
      pool.pop_back();
      --left;
    }
    return out;
  }

  const std::vector<T>& items() const { return items_; }
  std::uint64_t seen() const { return seen_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<T> items_;
};

/// Streaming mean and covariance (Welford / Chan). Above `full_limit`
/// dimensions only the diagonal is kept.
class OnlineMoments {
 public:
  explicit OnlineMoments(Eigen::Index dim = 0, Eigen::Index full_limit = 64);

  void add(const Eigen::VectorXd& x);
  void merge(const OnlineMoments& other);

  std::uint64_t count() const { return count_; }
  Eigen::Index dim() const { return mean_.size(); }
  bool has_full_covariance() const { return full_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Unbiased (n-1) covariance. Throws if only the diagonal is tracked.
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd variance() const;

 private:
  bool full_;
  std::uint64_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;   // full
  Eigen::VectorXd m2d_;  // diagonal-only
};

/// Thinned trace of monitored quantities for one worker.
struct Trace {
  std::vector<std::string> names;
  std::vector<std::uint64_t> steps;
  std::vector<double> data;  // row-major, names.size() per row

  std::size_t width() const { return names.size(); }
  std::size_t length() const { return steps.size(); }
  void append(std::uint64_t step, const Eigen::VectorXd& row);
  std::vector<double> column(std::size_t k) const;
  Eigen::MatrixXd matrix() const;
};

/// Flags the first step at which a magnitude reaches the bound.
class DivergenceMonitor {
 public:
  explicit DivergenceMonitor(double bound = std::numeric_limits<double>::infinity())
      : bound_(bound) {}

  /// Returns true once diverged (sticky).
  bool observe(std::uint64_t step, double magnitude);

  bool flagged() const { return first_.has_value(); }
  std::optional<std::uint64_t> first_step() const { return first_; }
  double bound() const { return bound_; }

 private:
  double bound_;
  std::optional<std::uint64_t> first_;
};

struct WorkerDiagnostics {
  Reservoir<MhRecord> mh_ratios;
  Trace trace;
  OnlineMoments moments;
  DivergenceMonitor divergence;
};

/// Merged view across workers, built after a run.
struct DiagnosticsRecord {
  Reservoir<MhRecord> mh_ratios{10000};
  std::vector<Trace> traces;
  std::vector<OnlineMoments> worker_moments;
  OnlineMoments pooled_moments;
  bool diverged = false;
  std::optional<std::uint64_t> divergence_step;
  std::optional<WorkerId> divergence_worker;

  static DiagnosticsRecord merge(const std::vector<WorkerDiagnostics>& workers, Rng& rng);
};

inline constexpr std::size_t kHistogramBins = 20;

struct DiagnosticASummary {
  double threshold = 0.5;
  double fraction_below = 0.0;
  std::size_t total = 0;
  std::array<std::size_t, kHistogramBins> counts{};

  double bin_fraction(std::size_t bin) const;
};

/// Fraction of recorded acceptance probabilities below `threshold`, plus a
/// 20-bin histogram on [0, 1] (1.0 falls in the top bin).
DiagnosticASummary diagnostic_a_summary(const std::vector<MhRecord>& ratios,
                                        double threshold = 0.5);
DiagnosticASummary diagnostic_a_summary(const DiagnosticsRecord& record,
                                        double threshold = 0.5);

/// Sample autocorrelation with biased (1/n) normalization; out[0] == 1.
std::vector<double> acf(std::span<const double> trace, std::size_t max_lag);

/// Default lag horizon: min(5000, len / 4).
std::size_t default_max_lag(std::size_t length);

/// Standard error of the mean by non-overlapping batch means
/// (floor(sqrt(n)) batches unless given).
double batch_means_se(std::span<const double> trace, std::size_t batches = 0);

double frobenius_relative_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

}  // namespace asyncgibbs
