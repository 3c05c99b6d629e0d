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

#include <vector>

#include <Eigen/Dense>

#include "asyncgibbs/core/model.hpp"

namespace asyncgibbs {

/// Precision-parameterised conditional of one block: precision is the
/// sub-block Λ_BB, mean solves Λ_BB (m - μ_B) = -Λ_B,rest (x_rest - μ_rest).
struct BlockConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// N(mean, precision⁻¹) with the index set split into sampling blocks.
/// Blocks of size one are scalar coordinates; larger blocks are vectors.
class GaussianTarget : public TargetModel {
 public:
  static constexpr Eigen::Index kDefaultMaxDim = 256;

  /// blocks empty: one coordinate per dimension.
  GaussianTarget(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                 std::vector<std::vector<Eigen::Index>> blocks = {},
                 Eigen::Index max_dim = kDefaultMaxDim);

  static GaussianTarget from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance,
                                        std::vector<std::vector<Eigen::Index>> blocks = {});

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const std::vector<std::vector<Eigen::Index>>& blocks() const { return blocks_; }

  /// Stacks a state into one dim-length vector.
  Eigen::VectorXd flatten(const ParameterState& state) const;
  ParameterState unflatten(const Eigen::VectorXd& x) const;

  BlockConditional conditional_block(const Eigen::VectorXd& x, CoordinateId block) const;
  BlockConditional conditional_block(const ParameterState& state, CoordinateId block) const;

  std::size_t num_coords() const override { return blocks_.size(); }
  Shape shape(CoordinateId c) const override;
  std::string coord_name(CoordinateId c) const override;
  ParameterState initial_state() const override;
  double log_joint(const ParameterState& state) const override;
  double log_joint_ratio(const ParameterState& state, CoordinateId c,
                         const Value& v) const override;
  Draw sample_full_conditional(const ParameterState& state, CoordinateId c,
                               Rng& rng) const override;
  std::vector<std::string> monitor_names() const override;
  Eigen::VectorXd monitor(const ParameterState& state) const override;

  void set_initial(Eigen::VectorXd x0);

 private:
  struct BlockCache {
    Eigen::MatrixXd covariance;   // Λ_BB⁻¹
    Eigen::MatrixXd factor;       // lower Cholesky factor of Λ_BB
  };

  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd covariance_;
  std::vector<std::vector<Eigen::Index>> blocks_;
  std::vector<BlockCache> block_cache_;
  Eigen::VectorXd initial_;
};

/// Contiguous blocks of `block_size` indices (the last may be shorter).
std::vector<std::vector<Eigen::Index>> contiguous_blocks(Eigen::Index dim, Eigen::Index block_size);

/// precision = 0.01 I + ones: strong equicorrelated dependence.
GaussianTarget build_jacobi_target(Eigen::Index dim, Eigen::Index block_size = 1);

/// Covariance Σ_ij = exp(-phi |i-j|), zero mean.
GaussianTarget build_exponential_target(Eigen::Index dim, double phi, Eigen::Index block_size = 1);

/// Unit variances with constant correlation rho between every pair.
GaussianTarget build_equicorrelated_target(Eigen::Index dim, double rho,
                                           Eigen::Index block_size = 1);

}  // namespace asyncgibbs
