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

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asyncgibbs/core/model.hpp"
#include "asyncgibbs/core/proposal.hpp"

namespace asyncgibbs {

struct GpConfig {
  Eigen::Index n = 1200;
  double rho = 0.06;
  double phi = 0.5;
  Eigen::Index block_size = 300;
  /// Truncation radius for T⁻¹ products; 0 picks the smallest radius whose
  /// omitted entries are below 1e-10, per conditional.
  Eigen::Index band_width = 0;

  // μ ~ N(a_mu, b_mu), σ² ~ IG(a_sigma, b_sigma), τ² ~ IG(a_tau, b_tau).
  double a_mu = 0.0;
  double b_mu = 10.0;
  double a_sigma = 2.0;
  double b_sigma = 0.1;
  double a_tau = 2.0;
  double b_tau = 1.0;

  double noise_sd = 0.2;

  double init_mu = 10.0;
  double init_sigma2 = 10.0;
  double init_tau2 = 10.0;
  double init_theta = 0.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GpData {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Periodic, continuous extension of 0.3 + 0.4x + 0.4 sin(2.7x) + 1.1/(1+x²)
/// on [-3, 3], mirrored about x = ±3, ±9, ... (period 12).
double gp_truth(double x);

/// x_i = (i - n/2) rho, y_i = gp_truth(x_i) + N(0, noise_sd²).
GpData generate_gp_data(const GpConfig& config, std::uint64_t seed);

void write_gp_csv(const std::filesystem::path& path, const GpData& data);
GpData read_gp_csv(const std::filesystem::path& path);

/// Inverse of the exponential correlation matrix exp(-φρ|i-j|), N×N:
/// tridiagonal, diagonal (d0, b, ..., b, d0), off-diagonal a.
struct ToeplitzInverse {
  double a = 0.0;
  double b = 0.0;
  double d0 = 0.0;
  Eigen::Index dim = 0;

  Eigen::MatrixXd dense() const;
  /// Q v in O(N).
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// vᵀ Q v in O(N).
  double quadratic(const Eigen::VectorXd& v) const;
};

ToeplitzInverse toeplitz_exp_inverse(double phi, double rho, Eigen::Index n);

/// Dense exp(-φρ|i-j|).
Eigen::MatrixXd exp_correlation(double phi, double rho, Eigen::Index n);

/// Entry (i, j) of the inverse of the N×N tridiagonal Toeplitz matrix with
/// diagonal b and off-diagonals a, in closed form. Requires |b| > 2|a|.
double tridiag_toeplitz_inverse_entry(double b, double a, Eigen::Index n, Eigen::Index i,
                                      Eigen::Index j);

Eigen::MatrixXd tridiag_toeplitz_inverse_dense(double b, double a, Eigen::Index n);

/// Smallest w such that every entry with |i-j| > w is below tol in magnitude.
Eigen::Index tridiag_toeplitz_band_width(double b, double a, Eigen::Index n, double tol = 1e-10);

/// T⁻¹ rhs using only the entries with |i-j| <= band_width.
/// band_width < 0 selects tridiag_toeplitz_band_width(b, a, n).
Eigen::VectorXd tridiag_toeplitz_inverse_apply(double b, double a, Eigen::Index n,
                                               const Eigen::VectorXd& rhs,
                                               Eigen::Index band_width = -1);

/// Quadratic forms of the exact prior precision Q that the hyperparameter
/// conditionals need.
struct GpSufficientSums {
  Eigen::Index n = 0;
  double rss = 0.0;            // Σ (y_i - θ_i)²
  double theta_q_theta = 0.0;  // θᵀQθ
  double one_q_theta = 0.0;    // 1ᵀQθ
  double one_q_one = 0.0;      // 1ᵀQ1
};

GpSufficientSums gp_sufficient_sums(const ToeplitzInverse& q, const Eigen::VectorXd& theta,
                                    const Eigen::VectorXd& y);

GaussianScalar gp_mu_conditional(const GpConfig& config, const GpSufficientSums& sums,
                                 double tau2);
InverseGamma gp_sigma2_conditional(const GpConfig& config, const GpSufficientSums& sums);
InverseGamma gp_tau2_conditional(const GpConfig& config, const GpSufficientSums& sums, double mu);

struct GpBlockConditional {
  Eigen::VectorXd mean;
  double diag = 0.0;  // P_BB diagonal
  double off = 0.0;   // P_BB off-diagonal
  Eigen::Index band_width = 0;

  /// Dense P_BB⁻¹; for tests.
  Eigen::MatrixXd covariance() const;
  /// Lower bidiagonal Cholesky factor of P_BB, stored dense.
  Eigen::MatrixXd precision_factor() const;
};

/// Observation noise, GP prior on θ, and conjugate hyperpriors. Coordinates:
/// θ blocks 0..K-1 (transmitted), then μ, σ², τ² (top-level).
class GpModel : public TargetModel {
 public:
  GpModel(GpConfig config, GpData data);

  const GpConfig& config() const { return config_; }
  const GpData& data() const { return data_; }
  const ToeplitzInverse& prior_precision() const { return q_; }
  Eigen::Index num_blocks() const { return num_blocks_; }

  CoordinateId mu_coord() const { return CoordinateId{static_cast<std::size_t>(num_blocks_)}; }
  CoordinateId sigma2_coord() const { return CoordinateId{mu_coord().index + 1}; }
  CoordinateId tau2_coord() const { return CoordinateId{mu_coord().index + 2}; }

  Eigen::VectorXd theta(const ParameterState& state) const;

  /// Block conditional with the corner entries of Q replaced by b and the
  /// mean product truncated to the band.
  GpBlockConditional theta_block_conditional(const ParameterState& state, Eigen::Index block) const;

  std::size_t num_coords() const override { return static_cast<std::size_t>(num_blocks_) + 3; }
  Shape shape(CoordinateId c) const override;
  std::string coord_name(CoordinateId c) const override;
  std::vector<CoordinateId> top_level_coords() const override;
  ParameterState initial_state() const override;
  double log_joint(const ParameterState& state) const override;
  double log_joint_ratio(const ParameterState& state, CoordinateId c,
                         const Value& v) const override;
  Draw sample_full_conditional(const ParameterState& state, CoordinateId c,
                               Rng& rng) const override;
  /// mu, sigma2, tau2, then theta[0..n-1].
  std::vector<std::string> monitor_names() const override;
  Eigen::VectorXd monitor(const ParameterState& state) const override;

 private:
  GpConfig config_;
  GpData data_;
  ToeplitzInverse q_;
  Eigen::Index num_blocks_ = 0;
};

/// Dense oracle: mean and covariance of θ | y, μ, σ², τ² using the exact prior.
struct GpDensePosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
GpDensePosterior gp_dense_posterior(const GpConfig& config, const Eigen::VectorXd& y, double mu,
                                    double sigma2, double tau2);

}  // namespace asyncgibbs
