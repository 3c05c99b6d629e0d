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

#include <variant>

#include <Eigen/Dense>

#include "asyncgibbs/core/rng.hpp"
#include "asyncgibbs/core/value.hpp"

namespace asyncgibbs {

struct GaussianScalar {
  double mean = 0.0;
  double variance = 1.0;
};

/// Multivariate normal stored through the lower Cholesky factor L of its
/// precision (L Lᵀ = precision). Density and sampling are both O(k²).
struct GaussianVector {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision_factor;

  static GaussianVector from_precision(Eigen::VectorXd mean, const Eigen::MatrixXd& precision);
  static GaussianVector from_covariance(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance);
  /// Takes an already computed lower factor; only the lower triangle is read.
  static GaussianVector from_precision_factor(Eigen::VectorXd mean, Eigen::MatrixXd factor);

  Eigen::MatrixXd precision() const;
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd sample(Rng& rng) const;
};

/// Density ∝ x^{-shape-1} exp(-scale / x) on x > 0.
struct InverseGamma {
  double shape = 1.0;
  double scale = 1.0;

  double sample(Rng& rng) const;
};

/// Density ∝ |X|^{-(dof+p+1)/2} exp(-tr(scale X⁻¹)/2) on SPD p×p matrices.
struct InverseWishart {
  double dof = 1.0;
  Eigen::MatrixXd scale;

  Eigen::MatrixXd sample(Rng& rng) const;
};

struct PointMass {
  Value value;
};

/// Parameters of the distribution a sender drew from, carried with each update
/// so receivers can evaluate the proposal density.
using ProposalDescriptor =
    std::variant<GaussianScalar, GaussianVector, InverseGamma, InverseWishart, PointMass>;

/// Exact log density of `descriptor` at `v`; -infinity outside the support.
/// Throws Error when the shape of `v` cannot match the family.
double proposal_log_density(const ProposalDescriptor& descriptor, const Value& v);

Value sample_proposal(const ProposalDescriptor& descriptor, Rng& rng);

/// Checks parameter validity (positive variances, SPD matrices, dof range).
void validate_proposal(const ProposalDescriptor& descriptor);

double log_multivariate_gamma(double a, int p);

}  // namespace asyncgibbs
