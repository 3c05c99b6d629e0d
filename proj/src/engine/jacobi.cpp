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

#include "asyncgibbs/engine/jacobi.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

Eigen::VectorXd jacobi_step(const GaussianTarget& target, const Eigen::VectorXd& x, Rng& rng) {
  const Eigen::MatrixXd& lambda = target.precision();
  const Eigen::VectorXd& mu = target.mean();
  if (x.size() != mu.size()) throw Error("jacobi_step: state has the wrong dimension");
  const Eigen::VectorXd z = x - mu;
  const Eigen::VectorXd coupled = lambda * z;
  Eigen::VectorXd next(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = lambda(i, i);
    const double off = coupled(i) - d * z(i);
    next(i) = mu(i) - off / d + rng.normal() / std::sqrt(d);
  }
  return next;
}

Eigen::MatrixXd jacobi_iteration_matrix(const Eigen::MatrixXd& precision) {
  const Eigen::VectorXd inv_diag = precision.diagonal().cwiseInverse();
  Eigen::MatrixXd m = -(inv_diag.asDiagonal() * precision);
  m.diagonal().setZero();
  return m;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

JacobiRun run_jacobi(const GaussianTarget& target, Eigen::VectorXd x0, std::uint64_t n_steps,
                     double divergence_bound, std::uint64_t seed, bool stop_on_divergence) {
  JacobiRun out;
  out.moments = OnlineMoments(target.dim());
  DivergenceMonitor monitor(divergence_bound);
  Rng rng(seed, kSamplingStream);
  Eigen::VectorXd x = std::move(x0);
  for (std::uint64_t t = 1; t <= n_steps; ++t) {
    x = jacobi_step(target, x, rng);
    out.steps = t;
    out.moments.add(x);
    const double mag = x.allFinite() ? x.cwiseAbs().maxCoeff()
                                     : std::numeric_limits<double>::infinity();
    if (monitor.observe(t, mag) && stop_on_divergence) break;
  }
  out.diverged = monitor.first_step().has_value();
  out.divergence_step = monitor.first_step();
  out.final_state = std::move(x);
  return out;
}

}  // namespace asyncgibbs
