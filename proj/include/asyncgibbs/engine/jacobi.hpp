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
#include <optional>

#include <Eigen/Dense>

#include "asyncgibbs/core/rng.hpp"
#include "asyncgibbs/diagnostics/diagnostics.hpp"
#include "asyncgibbs/models/gaussian.hpp"

namespace asyncgibbs {

/// Fully synchronous parallel Gibbs: every coordinate is redrawn from its
/// scalar full conditional given the previous values of all the others.
Eigen::VectorXd jacobi_step(const GaussianTarget& target, const Eigen::VectorXd& x, Rng& rng);

/// diag(Λ)⁻¹ (diag(Λ) - Λ); the map x ↦ E[next | x] for a zero-mean target.
Eigen::MatrixXd jacobi_iteration_matrix(const Eigen::MatrixXd& precision);

/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& m);

struct JacobiRun {
  std::uint64_t steps = 0;
  bool diverged = false;
  std::optional<std::uint64_t> divergence_step;
  Eigen::VectorXd final_state;
  OnlineMoments moments;
};

/// Iterates jacobi_step from x0, feeding max|x| to a divergence monitor.
/// Stops at the first flag when stop_on_divergence is set.
JacobiRun run_jacobi(const GaussianTarget& target, Eigen::VectorXd x0, std::uint64_t n_steps,
                     double divergence_bound, std::uint64_t seed,
                     bool stop_on_divergence = true);

}  // namespace asyncgibbs
