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

#include "asyncgibbs/diagnostics/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

OnlineMoments::OnlineMoments(Eigen::Index dim, Eigen::Index full_limit)
    : full_(dim <= full_limit), mean_(Eigen::VectorXd::Zero(dim)) {
  if (full_) {
    m2_ = Eigen::MatrixXd::Zero(dim, dim);
  } else {
    m2d_ = Eigen::VectorXd::Zero(dim);
  }
}

void OnlineMoments::add(const Eigen::VectorXd& x) {
  if (x.size() != mean_.size()) throw Error("OnlineMoments: dimension mismatch");
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  const Eigen::VectorXd delta_after = x - mean_;
  if (full_) {
    m2_.noalias() += delta * delta_after.transpose();
  } else {
    m2d_.array() += delta.array() * delta_after.array();
  }
}

void OnlineMoments::merge(const OnlineMoments& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.mean_.size() != mean_.size() || other.full_ != full_) {
    throw Error("OnlineMoments: cannot merge accumulators of different layout");
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  if (full_) {
    m2_ += other.m2_ + delta * delta.transpose() * (na * nb / n);
  } else {
    m2d_ += other.m2d_ + delta.cwiseAbs2() * (na * nb / n);
  }
  mean_ += delta * (nb / n);
  count_ += other.count_;
}

Eigen::MatrixXd OnlineMoments::covariance() const {
  if (!full_) throw Error("OnlineMoments: only the diagonal is tracked");
  if (count_ < 2) return Eigen::MatrixXd::Zero(dim(), dim());
  Eigen::MatrixXd cov = m2_ / static_cast<double>(count_ - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd OnlineMoments::variance() const {
  if (count_ < 2) return Eigen::VectorXd::Zero(dim());
  const double denom = static_cast<double>(count_ - 1);
  return full_ ? Eigen::VectorXd(m2_.diagonal() / denom) : Eigen::VectorXd(m2d_ / denom);
}

void Trace::append(std::uint64_t step, const Eigen::VectorXd& row) {
  steps.push_back(step);
  const std::size_t w = width();
  for (std::size_t k = 0; k < w; ++k) data.push_back(row(static_cast<Eigen::Index>(k)));
}

std::vector<double> Trace::column(std::size_t k) const {
  std::vector<double> out(length());
  const std::size_t w = width();
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = data[t * w + k];
  return out;
}

Eigen::MatrixXd Trace::matrix() const {
  const auto rows = static_cast<Eigen::Index>(length());
  const auto cols = static_cast<Eigen::Index>(width());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index k = 0; k < cols; ++k) out(t, k) = data[t * cols + k];
  }
  return out;
}

bool DivergenceMonitor::observe(std::uint64_t step, double magnitude) {
  if (!first_ && !(magnitude < bound_)) first_ = step;
  return first_.has_value();
}

DiagnosticsRecord DiagnosticsRecord::merge(const std::vector<WorkerDiagnostics>& workers,
                                           Rng& rng) {
  DiagnosticsRecord out;
  if (workers.empty()) return out;
  out.mh_ratios = Reservoir<MhRecord>(workers.front().mh_ratios.capacity());
  out.pooled_moments = OnlineMoments(workers.front().moments.dim());
  for (std::size_t w = 0; w < workers.size(); ++w) {
    const auto& wd = workers[w];
    out.mh_ratios = Reservoir<MhRecord>::merge(out.mh_ratios, wd.mh_ratios, rng);
    out.traces.push_back(wd.trace);
    out.worker_moments.push_back(wd.moments);
    out.pooled_moments.merge(wd.moments);
    if (auto step = wd.divergence.first_step()) {
      if (!out.divergence_step || *step < *out.divergence_step) {
        out.divergence_step = step;
        out.divergence_worker = w;
      }
      out.diverged = true;
    }
  }
  return out;
}

double DiagnosticASummary::bin_fraction(std::size_t bin) const {
  return total ? static_cast<double>(counts[bin]) / static_cast<double>(total) : 0.0;
}

DiagnosticASummary diagnostic_a_summary(const std::vector<MhRecord>& ratios, double threshold) {
  if (ratios.empty()) {
    throw Error(
        "no Metropolis-Hastings ratios were recorded; raise run.diag_sample_prob "
        "(or run with more than one worker)");
  }
  DiagnosticASummary out;
  out.threshold = threshold;
  out.total = ratios.size();
  std::size_t below = 0;
  for (const auto& r : ratios) {
    if (r.alpha < threshold) ++below;
    const double a = std::clamp(r.alpha, 0.0, 1.0);
    auto bin = static_cast<std::size_t>(a * kHistogramBins);
    out.counts[std::min(bin, kHistogramBins - 1)]++;
  }
  out.fraction_below = static_cast<double>(below) / static_cast<double>(out.total);
  return out;
}

DiagnosticASummary diagnostic_a_summary(const DiagnosticsRecord& record, double threshold) {
  return diagnostic_a_summary(record.mh_ratios.items(), threshold);
}

namespace {

// FFTW's planner is not reentrant; plan creation and destruction share a lock.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftBuffers {
  double* real = nullptr;
  fftw_complex* freq = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftBuffers(std::size_t size) {
    real = fftw_alloc_real(size);
    freq = fftw_alloc_complex(size / 2 + 1);
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), real, freq, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), freq, real, FFTW_ESTIMATE);
  }
  ~FftBuffers() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(forward);
      fftw_destroy_plan(backward);
    }
    fftw_free(real);
    fftw_free(freq);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;
};

}  // namespace

std::vector<double> acf(std::span<const double> trace, std::size_t max_lag) {
  const std::size_t n = trace.size();
  if (n <= max_lag) {
    throw Error("acf: trace length " + std::to_string(n) + " must exceed max_lag " +
                std::to_string(max_lag));
  }
  double mean = 0.0;
  for (double x : trace) mean += x;
  mean /= static_cast<double>(n);

  // Zero-padded FFT: |F|^2 inverted gives the linear autocovariance sums.
  std::size_t size = 1;
  while (size < 2 * n) size <<= 1;
  FftBuffers fft(size);
  for (std::size_t i = 0; i < size; ++i) fft.real[i] = i < n ? trace[i] - mean : 0.0;
  fftw_execute(fft.forward);
  for (std::size_t k = 0; k < size / 2 + 1; ++k) {
    fft.freq[k][0] = fft.freq[k][0] * fft.freq[k][0] + fft.freq[k][1] * fft.freq[k][1];
    fft.freq[k][1] = 0.0;
  }
  fftw_execute(fft.backward);
  const double c0 = fft.real[0];
  if (!(c0 > 1e-300 * static_cast<double>(size)) || !std::isfinite(c0)) {
    throw Error("acf: trace has zero variance");
  }
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = fft.real[k] / c0;
  out[0] = 1.0;
  return out;
}

std::size_t default_max_lag(std::size_t length) {
  return std::min<std::size_t>(5000, length / 4);
}

double batch_means_se(std::span<const double> trace, std::size_t batches) {
  const std::size_t n = trace.size();
  if (batches == 0) batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (batches < 2 || n < 2 * batches) throw Error("batch_means_se: trace too short");
  const std::size_t size = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += trace[b * size + i];
    means[b] = s / static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_batch = ss / static_cast<double>(batches - 1);
  return std::sqrt(var_batch / static_cast<double>(batches));
}

double frobenius_relative_error(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw Error("frobenius_relative_error: shape mismatch");
  }
  return (estimate - truth).norm() / truth.norm();
}

}  // namespace asyncgibbs
