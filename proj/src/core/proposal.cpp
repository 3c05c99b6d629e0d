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

#include "asyncgibbs/core/proposal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

Eigen::MatrixXd lower_factor(const Eigen::MatrixXd& spd, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(spd);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  return llt.matrixL();
}

double gaussian_vector_log_density(const GaussianVector& g, const Value& v) {
  const auto x = v.as_vector();
  if (x.size() != g.mean.size()) {
    throw Error("GaussianVector of dimension " + std::to_string(g.mean.size()) +
                " evaluated at " + v.shape().to_string());
  }
  const Eigen::VectorXd centered = x - g.mean;
  const Eigen::VectorXd whitened =
      g.precision_factor.triangularView<Eigen::Lower>().transpose() * centered;
  const double log_det_factor = g.precision_factor.diagonal().array().log().sum();
  return -0.5 * static_cast<double>(x.size()) * kLogTwoPi + log_det_factor -
         0.5 * whitened.squaredNorm();
}

double inverse_wishart_log_density(const InverseWishart& iw, const Value& v) {
  const Eigen::MatrixXd& x = v.as_matrix();
  const auto p = iw.scale.rows();
  if (v.kind() != ValueKind::kMatrix || x.rows() != p || x.cols() != p) {
    throw Error("InverseWishart of dimension " + std::to_string(p) + " evaluated at " +
                v.shape().to_string());
  }
  if (!x.isApprox(x.transpose(), 1e-12)) return kNegInf;
  Eigen::LLT<Eigen::MatrixXd> x_llt(x);
  if (x_llt.info() != Eigen::Success) return kNegInf;
  Eigen::LLT<Eigen::MatrixXd> s_llt(iw.scale);
  const double log_det_x = 2.0 * Eigen::MatrixXd(x_llt.matrixL()).diagonal().array().log().sum();
  const double log_det_s = 2.0 * Eigen::MatrixXd(s_llt.matrixL()).diagonal().array().log().sum();
  const double trace_term = x_llt.solve(iw.scale).trace();
  const double pd = static_cast<double>(p);
  return 0.5 * iw.dof * log_det_s - 0.5 * iw.dof * pd * std::log(2.0) -
         log_multivariate_gamma(0.5 * iw.dof, static_cast<int>(p)) -
         0.5 * (iw.dof + pd + 1.0) * log_det_x - 0.5 * trace_term;
}

}  // namespace

GaussianVector GaussianVector::from_precision(Eigen::VectorXd mean,
                                              const Eigen::MatrixXd& precision) {
  if (precision.rows() != mean.size() || precision.cols() != mean.size()) {
    throw Error("GaussianVector: precision shape does not match mean");
  }
  return {std::move(mean), lower_factor(precision, "GaussianVector precision")};
}

GaussianVector GaussianVector::from_covariance(Eigen::VectorXd mean,
                                               const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw Error("GaussianVector: covariance shape does not match mean");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("GaussianVector covariance is not positive definite");
  }
  const Eigen::MatrixXd precision =
      llt.solve(Eigen::MatrixXd::Identity(mean.size(), mean.size()));
  return from_precision(std::move(mean), 0.5 * (precision + precision.transpose()));
}

GaussianVector GaussianVector::from_precision_factor(Eigen::VectorXd mean,
                                                     Eigen::MatrixXd factor) {
  if (factor.rows() != mean.size() || factor.cols() != mean.size()) {
    throw Error("GaussianVector: factor shape does not match mean");
  }
  factor.triangularView<Eigen::StrictlyUpper>().setZero();
  if (!(factor.diagonal().array() > 0.0).all()) {
    throw NumericalError("GaussianVector precision factor has a non-positive diagonal");
  }
  return {std::move(mean), std::move(factor)};
}

Eigen::MatrixXd GaussianVector::precision() const {
  const Eigen::MatrixXd lower = precision_factor.triangularView<Eigen::Lower>();
  return lower * lower.transpose();
}

Eigen::MatrixXd GaussianVector::covariance() const {
  const auto k = mean.size();
  const Eigen::MatrixXd inv_factor =
      precision_factor.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
  return inv_factor.transpose() * inv_factor;
}

Eigen::VectorXd GaussianVector::sample(Rng& rng) const {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  // Lᵀ x = z gives cov(x) = (L Lᵀ)⁻¹.
  precision_factor.triangularView<Eigen::Lower>().transpose().solveInPlace(z);
  return mean + z;
}

double InverseGamma::sample(Rng& rng) const { return 1.0 / rng.gamma(shape, 1.0 / scale); }

Eigen::MatrixXd InverseWishart::sample(Rng& rng) const {
  // Bartlett decomposition of W ~ Wishart(dof, scale⁻¹), then invert.
  const auto p = scale.rows();
  Eigen::LLT<Eigen::MatrixXd> scale_llt(scale);
  if (scale_llt.info() != Eigen::Success) {
    throw NumericalError("InverseWishart scale is not positive definite");
  }
  const Eigen::MatrixXd scale_inv = scale_llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd l = lower_factor(scale_inv, "InverseWishart scale inverse");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd la = l * a;
  const Eigen::MatrixXd wishart = la * la.transpose();
  Eigen::MatrixXd out = wishart.llt().solve(Eigen::MatrixXd::Identity(p, p));
  return 0.5 * (out + out.transpose());
}

double log_multivariate_gamma(double a, int p) {
  double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= p; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

double proposal_log_density(const ProposalDescriptor& descriptor, const Value& v) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianScalar>) {
          const double x = v.as_scalar();
          const double z = x - d.mean;
          return -0.5 * (kLogTwoPi + std::log(d.variance)) - 0.5 * z * z / d.variance;
        } else if constexpr (std::is_same_v<T, GaussianVector>) {
          return gaussian_vector_log_density(d, v);
        } else if constexpr (std::is_same_v<T, InverseGamma>) {
          const double x = v.as_scalar();
          if (!(x > 0.0)) return kNegInf;
          return d.shape * std::log(d.scale) - std::lgamma(d.shape) -
                 (d.shape + 1.0) * std::log(x) - d.scale / x;
        } else if constexpr (std::is_same_v<T, InverseWishart>) {
          return inverse_wishart_log_density(d, v);
        } else {
          if (!(d.value.shape() == v.shape())) {
            throw Error("PointMass of shape " + d.value.shape().to_string() +
                        " evaluated at " + v.shape().to_string());
          }
          return d.value == v ? 0.0 : kNegInf;
        }
      },
      descriptor);
}

Value sample_proposal(const ProposalDescriptor& descriptor, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> Value {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianScalar>) {
          return Value::scalar(d.mean + std::sqrt(d.variance) * rng.normal());
        } else if constexpr (std::is_same_v<T, GaussianVector>) {
          return Value::vector(d.sample(rng));
        } else if constexpr (std::is_same_v<T, InverseGamma>) {
          return Value::scalar(d.sample(rng));
        } else if constexpr (std::is_same_v<T, InverseWishart>) {
          return Value::matrix(d.sample(rng));
        } else {
          return d.value;
        }
      },
      descriptor);
}

void validate_proposal(const ProposalDescriptor& descriptor) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianScalar>) {
          if (!(d.variance > 0.0) || !std::isfinite(d.variance) || !std::isfinite(d.mean)) {
            throw NumericalError("GaussianScalar needs finite mean and positive variance");
          }
        } else if constexpr (std::is_same_v<T, GaussianVector>) {
          if (!d.mean.allFinite() || !d.precision_factor.allFinite() ||
              !(d.precision_factor.diagonal().array() > 0.0).all()) {
            throw NumericalError("GaussianVector parameters invalid");
          }
        } else if constexpr (std::is_same_v<T, InverseGamma>) {
          if (!(d.shape > 0.0) || !(d.scale > 0.0)) {
            throw NumericalError("InverseGamma needs positive shape and scale");
          }
        } else if constexpr (std::is_same_v<T, InverseWishart>) {
          if (!(d.dof > static_cast<double>(d.scale.rows()) - 1.0)) {
            throw NumericalError("InverseWishart dof must exceed dimension - 1");
          }
          lower_factor(d.scale, "InverseWishart scale");
        }
      },
      descriptor);
}

}  // namespace asyncgibbs
