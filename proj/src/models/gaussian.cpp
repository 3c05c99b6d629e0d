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

#include "asyncgibbs/models/gaussian.hpp"

#include <cmath>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

std::vector<std::vector<Eigen::Index>> contiguous_blocks(Eigen::Index dim,
                                                         Eigen::Index block_size) {
  if (block_size < 1) throw ConfigError("model.block_size", "must be at least 1");
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index start = 0; start < dim; start += block_size) {
    std::vector<Eigen::Index> b;
    for (Eigen::Index i = start; i < std::min(dim, start + block_size); ++i) b.push_back(i);
    out.push_back(std::move(b));
  }
  return out;
}

GaussianTarget::GaussianTarget(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                               std::vector<std::vector<Eigen::Index>> blocks,
                               Eigen::Index max_dim)
    : mean_(std::move(mean)), precision_(std::move(precision)), blocks_(std::move(blocks)) {
  const Eigen::Index n = mean_.size();
  if (n < 1) throw ConfigError("model.dim", "must be at least 1");
  if (n > max_dim) {
    throw ConfigError("model.dim", "dimension " + std::to_string(n) + " exceeds the cap of " +
                                       std::to_string(max_dim));
  }
  if (precision_.rows() != n || precision_.cols() != n) {
    throw Error("GaussianTarget: precision must be " + std::to_string(n) + "x" +
                std::to_string(n));
  }
  const double asym = (precision_ - precision_.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10 * std::max(1.0, precision_.cwiseAbs().maxCoeff()))) {
    throw Error("GaussianTarget: precision is not symmetric");
  }
  precision_ = 0.5 * (precision_ + precision_.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("GaussianTarget: precision is not positive definite");
  }
  covariance_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
  covariance_ = 0.5 * (covariance_ + covariance_.transpose());

  if (blocks_.empty()) blocks_ = contiguous_blocks(n, 1);
  std::vector<int> hits(static_cast<std::size_t>(n), 0);
  for (const auto& b : blocks_) {
    if (b.empty()) throw ConfigError("model.blocks", "empty block");
    for (auto i : b) {
      if (i < 0 || i >= n) throw ConfigError("model.blocks", "index out of range");
      ++hits[static_cast<std::size_t>(i)];
    }
  }
  for (int h : hits) {
    if (h != 1) throw ConfigError("model.blocks", "blocks must partition 0..dim-1 exactly");
  }

  for (const auto& b : blocks_) {
    const auto k = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) sub(r, c) = precision_(b[r], b[c]);
    }
    Eigen::LLT<Eigen::MatrixXd> sub_llt(sub);
    if (sub_llt.info() != Eigen::Success) {
      throw NumericalError("GaussianTarget: singular precision sub-block");
    }
    BlockCache cache;
    cache.factor = sub_llt.matrixL();
    cache.covariance = sub_llt.solve(Eigen::MatrixXd::Identity(k, k));
    block_cache_.push_back(std::move(cache));
  }
  initial_ = Eigen::VectorXd::Zero(n);
}

GaussianTarget GaussianTarget::from_covariance(Eigen::VectorXd mean,
                                               const Eigen::MatrixXd& covariance,
                                               std::vector<std::vector<Eigen::Index>> blocks) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("GaussianTarget: covariance is not positive definite");
  }
  Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(covariance.rows(),
                                                                   covariance.cols()));
  precision = 0.5 * (precision + precision.transpose());
  GaussianTarget out(std::move(mean), std::move(precision), std::move(blocks));
  out.covariance_ = covariance;
  return out;
}

void GaussianTarget::set_initial(Eigen::VectorXd x0) {
  if (x0.size() != dim()) throw ConfigError("model.init", "initial vector has the wrong length");
  initial_ = std::move(x0);
}

Shape GaussianTarget::shape(CoordinateId c) const {
  const auto k = static_cast<Eigen::Index>(blocks_.at(c.index).size());
  return k == 1 ? Shape::scalar() : Shape::vector(k);
}

std::string GaussianTarget::coord_name(CoordinateId c) const {
  const auto& b = blocks_.at(c.index);
  if (b.size() == 1) return "theta[" + std::to_string(b.front()) + "]";
  return "block[" + std::to_string(c.index) + "]";
}

Eigen::VectorXd GaussianTarget::flatten(const ParameterState& state) const {
  Eigen::VectorXd x(dim());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto v = state.at(CoordinateId{k}).flat();
    const auto& b = blocks_[k];
    for (std::size_t j = 0; j < b.size(); ++j) x(b[j]) = v(static_cast<Eigen::Index>(j));
  }
  return x;
}

ParameterState GaussianTarget::unflatten(const Eigen::VectorXd& x) const {
  std::vector<Value> values;
  values.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.size() == 1) {
      values.push_back(Value::scalar(x(b.front())));
    } else {
      Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
      for (std::size_t j = 0; j < b.size(); ++j) v(static_cast<Eigen::Index>(j)) = x(b[j]);
      values.push_back(Value::vector(std::move(v)));
    }
  }
  return ParameterState(std::move(values));
}

ParameterState GaussianTarget::initial_state() const { return unflatten(initial_); }

BlockConditional GaussianTarget::conditional_block(const Eigen::VectorXd& x,
                                                   CoordinateId block) const {
  const auto& b = blocks_.at(block.index);
  const auto& cache = block_cache_[block.index];
  Eigen::VectorXd z = x - mean_;
  for (auto i : b) z(i) = 0.0;
  const auto k = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXd coupling(k);
  Eigen::VectorXd mu_b(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    coupling(r) = precision_.row(b[r]).dot(z);
    mu_b(r) = mean_(b[r]);
  }
  return {mu_b - cache.covariance * coupling, cache.covariance};
}

BlockConditional GaussianTarget::conditional_block(const ParameterState& state,
                                                   CoordinateId block) const {
  return conditional_block(flatten(state), block);
}

double GaussianTarget::log_joint(const ParameterState& state) const {
  const Eigen::VectorXd z = flatten(state) - mean_;
  return -0.5 * z.dot(precision_ * z);
}

double GaussianTarget::log_joint_ratio(const ParameterState& state, CoordinateId c,
                                       const Value& v) const {
  const auto& b = blocks_.at(c.index);
  const Eigen::VectorXd z = flatten(state) - mean_;
  const auto k = static_cast<Eigen::Index>(b.size());
  const auto old = state.at(c).flat();
  const auto next = v.flat();
  Eigen::VectorXd delta(k);
  Eigen::VectorXd grad(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    delta(r) = next(r) - old(r);
    grad(r) = precision_.row(b[r]).dot(z);
  }
  double quad = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index s = 0; s < k; ++s) quad += delta(r) * precision_(b[r], b[s]) * delta(s);
  }
  return -delta.dot(grad) - 0.5 * quad;
}

Draw GaussianTarget::sample_full_conditional(const ParameterState& state, CoordinateId c,
                                             Rng& rng) const {
  BlockConditional cond = conditional_block(state, c);
  if (blocks_[c.index].size() == 1) {
    const double var = cond.covariance(0, 0);
    const double x = cond.mean(0) + std::sqrt(var) * rng.normal();
    return {Value::scalar(x), GaussianScalar{cond.mean(0), var}};
  }
  GaussianVector g = GaussianVector::from_precision_factor(std::move(cond.mean),
                                                           block_cache_[c.index].factor);
  Eigen::VectorXd x = g.sample(rng);
  return {Value::vector(std::move(x)), std::move(g)};
}

std::vector<std::string> GaussianTarget::monitor_names() const {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < dim(); ++i) names.push_back("theta[" + std::to_string(i) + "]");
  return names;
}

Eigen::VectorXd GaussianTarget::monitor(const ParameterState& state) const {
  return flatten(state);
}

GaussianTarget build_jacobi_target(Eigen::Index dim, Eigen::Index block_size) {
  if (dim < 2) throw ConfigError("model.dim", "the Jacobi target needs dim >= 2");
  Eigen::MatrixXd precision = Eigen::MatrixXd::Ones(dim, dim);
  precision.diagonal().array() += 0.01;
  return GaussianTarget(Eigen::VectorXd::Zero(dim), std::move(precision),
                        contiguous_blocks(dim, block_size));
}

GaussianTarget build_exponential_target(Eigen::Index dim, double phi, Eigen::Index block_size) {
  if (dim < 1) throw ConfigError("model.dim", "must be at least 1");
  if (!(phi > 0.0)) throw ConfigError("model.phi", "must be positive");
  Eigen::MatrixXd cov(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      cov(i, j) = std::exp(-phi * static_cast<double>(std::abs(i - j)));
    }
  }
  return GaussianTarget::from_covariance(Eigen::VectorXd::Zero(dim), cov,
                                         contiguous_blocks(dim, block_size));
}

GaussianTarget build_equicorrelated_target(Eigen::Index dim, double rho, Eigen::Index block_size) {
  if (dim < 1) throw ConfigError("model.dim", "must be at least 1");
  const double lo = dim > 1 ? -1.0 / static_cast<double>(dim - 1) : -1.0;
  if (!(rho > lo && rho < 1.0)) {
    throw ConfigError("model.rho", "correlation outside the positive-definite range");
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(dim, dim, rho);
  cov.diagonal().setOnes();
  return GaussianTarget::from_covariance(Eigen::VectorXd::Zero(dim), cov,
                                         contiguous_blocks(dim, block_size));
}

}  // namespace asyncgibbs
