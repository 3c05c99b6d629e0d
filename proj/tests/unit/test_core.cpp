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

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/core/model.hpp"
#include "asyncgibbs/core/proposal.hpp"
#include "asyncgibbs/core/rng.hpp"
#include "asyncgibbs/core/state.hpp"
#include "asyncgibbs/models/gaussian.hpp"
#include "doctest.h"

using namespace asyncgibbs;

namespace {

GaussianTarget standard_normal_1d() {
  return GaussianTarget(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
}

GaussianTarget bivariate(double rho) {
  Eigen::Matrix2d cov;
  cov << 1.0, rho, rho, 1.0;
  return GaussianTarget::from_covariance(Eigen::VectorXd::Zero(2), cov);
}

Eigen::MatrixXd random_spd(Eigen::Index p, Rng& rng) {
  Eigen::MatrixXd a(p, p);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a * a.transpose() + static_cast<double>(p) * Eigen::MatrixXd::Identity(p, p);
}

}  // namespace

TEST_CASE("log_joint_ratio on a 1-D standard normal") {
  const auto model = standard_normal_1d();
  const CoordinateId c{0};
  SUBCASE("identity move") {
    ParameterState s({Value::scalar(0.0)});
    CHECK(log_joint_ratio(model, s, c, Value::scalar(0.0)) == 0.0);
  }
  SUBCASE("1 to 0") {
    ParameterState s({Value::scalar(1.0)});
    CHECK(log_joint_ratio(model, s, c, Value::scalar(0.0)) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("log_joint_ratio on the Jacobi precision, origin, coordinate 0 to 1") {
  const auto model = build_jacobi_target(8);
  const auto s = model.unflatten(Eigen::VectorXd::Zero(8));
  CHECK(log_joint_ratio(model, s, CoordinateId{0}, Value::scalar(1.0)) ==
        doctest::Approx(-0.505).epsilon(1e-12));
}

TEST_CASE("log_joint_ratio rejects mismatched shapes") {
  const auto model = bivariate(0.5);
  const auto s = model.initial_state();
  CHECK_THROWS_AS(log_joint_ratio(model, s, CoordinateId{0}, Value::vector(Eigen::VectorXd::Ones(2))),
                  Error);
}

TEST_CASE("log_joint_ratio is zero to self and antisymmetric") {
  Rng rng(7);
  const auto model = build_exponential_target(8, 0.5);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x(8);
    for (auto& v : x) v = rng.normal();
    const auto s = model.unflatten(x);
    const CoordinateId c{static_cast<std::size_t>(rep % 8)};
    CHECK(log_joint_ratio(model, s, c, s[c]) == 0.0);
    const Value next = Value::scalar(rng.normal() * 2.0);
    const double fwd = log_joint_ratio(model, s, c, next);
    ParameterState moved = s;
    moved.set(c, next);
    const double back = log_joint_ratio(model, moved, c, s[c]);
    CHECK(fwd == doctest::Approx(-back).epsilon(1e-12));
  }
}

TEST_CASE("full conditional of a bivariate normal") {
  const auto model = bivariate(0.5);
  const auto s = model.unflatten(Eigen::Vector2d(0.0, 2.0));
  Rng rng(1);
  const auto draw = sample_full_conditional(model, s, CoordinateId{0}, rng);
  const auto* g = std::get_if<GaussianScalar>(&draw.proposal);
  REQUIRE(g != nullptr);
  CHECK(g->mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g->variance == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("independent coordinates: conditional is the marginal") {
  Eigen::VectorXd mean(3);
  mean << 1.0, -2.0, 0.5;
  const Eigen::Vector3d var(2.0, 0.5, 3.0);
  const GaussianTarget model(mean, Eigen::MatrixXd(var.cwiseInverse().asDiagonal()));
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const auto s = model.unflatten(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * 10);
    for (std::size_t c = 0; c < 3; ++c) {
      const auto draw = sample_full_conditional(model, s, CoordinateId{c}, rng);
      const auto& g = std::get<GaussianScalar>(draw.proposal);
      CHECK(g.mean == doctest::Approx(mean(c)).epsilon(1e-12));
      CHECK(g.variance == doctest::Approx(var(c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exponential target, coordinate 3 conditional vs dense Schur complement") {
  const auto model = build_exponential_target(8, 0.5);
  Rng rng(11);
  Eigen::VectorXd x(8);
  for (auto& v : x) v = rng.normal();
  const auto s = model.unflatten(x);
  const auto draw = sample_full_conditional(model, s, CoordinateId{3}, rng);
  const auto& g = std::get<GaussianScalar>(draw.proposal);

  Eigen::MatrixXd sigma(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) sigma(i, j) = std::exp(-0.5 * std::abs(i - j));
  std::vector<int> rest;
  for (int i = 0; i < 8; ++i)
    if (i != 3) rest.push_back(i);
  Eigen::MatrixXd s_rr(7, 7);
  Eigen::RowVectorXd s_3r(7);
  Eigen::VectorXd x_r(7);
  for (int i = 0; i < 7; ++i) {
    s_3r(i) = sigma(3, rest[i]);
    x_r(i) = x(rest[i]);
    for (int j = 0; j < 7; ++j) s_rr(i, j) = sigma(rest[i], rest[j]);
  }
  const Eigen::VectorXd w = s_rr.ldlt().solve(s_3r.transpose());
  const double mean = w.dot(x_r);
  const double var = sigma(3, 3) - s_3r * w;
  CHECK(g.mean == doctest::Approx(mean).epsilon(1e-10));
  CHECK(g.variance == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("proposal_log_density fixed values") {
  CHECK(proposal_log_density(GaussianScalar{0.0, 1.0}, Value::scalar(0.0)) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-14));

  const Value v = Value::vector(Eigen::Vector2d(1.0, 2.0));
  const Value w = Value::vector(Eigen::Vector2d(1.0, 2.5));
  CHECK(proposal_log_density(PointMass{v}, v) == 0.0);
  CHECK(proposal_log_density(PointMass{v}, w) == -std::numeric_limits<double>::infinity());

  const double expected = std::log(9.0 * std::pow(1.5, -3.0) * std::exp(-2.0));
  CHECK(proposal_log_density(InverseGamma{2.0, 3.0}, Value::scalar(1.5)) ==
        doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("proposal_log_density outside the support is -inf, wrong shape throws") {
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(proposal_log_density(InverseGamma{2.0, 3.0}, Value::scalar(-1.0)) == ninf);
  CHECK(proposal_log_density(InverseGamma{2.0, 3.0}, Value::scalar(0.0)) == ninf);
  InverseWishart iw{5.0, Eigen::MatrixXd::Identity(2, 2)};
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK(proposal_log_density(iw, Value::matrix(indefinite)) == ninf);
  CHECK_THROWS_AS(proposal_log_density(GaussianScalar{}, Value::vector(Eigen::VectorXd::Ones(2))),
                  Error);
  CHECK_THROWS_AS(proposal_log_density(iw, Value::scalar(1.0)), Error);
}

TEST_CASE("validate_proposal rejects invalid parameters") {
  CHECK_THROWS(validate_proposal(GaussianScalar{0.0, 0.0}));
  CHECK_THROWS(validate_proposal(InverseGamma{-1.0, 1.0}));
  CHECK_THROWS(validate_proposal(InverseGamma{1.0, 0.0}));
  CHECK_THROWS(validate_proposal(InverseWishart{0.5, Eigen::MatrixXd::Identity(2, 2)}));
  CHECK_NOTHROW(validate_proposal(InverseWishart{3.0, Eigen::MatrixXd::Identity(2, 2)}));
}

TEST_CASE("1-D densities integrate to 1 by quadrature") {
  using boost::math::quadrature::exp_sinh;
  using boost::math::quadrature::gauss_kronrod;
  SUBCASE("InverseGamma(2, 3)") {
    exp_sinh<double> integrator;
    const double total = integrator.integrate([](double x) {
      return std::exp(proposal_log_density(InverseGamma{2.0, 3.0}, Value::scalar(x)));
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("conditionals of the exponential target") {
    const auto model = build_exponential_target(8, 0.5);
    Rng rng(5);
    const auto s = model.initial_state();
    for (std::size_t c = 0; c < 8; ++c) {
      const auto d = sample_full_conditional(model, s, CoordinateId{c}, rng).proposal;
      const auto& g = std::get<GaussianScalar>(d);
      const double sd = std::sqrt(g.variance);
      const double total = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return std::exp(proposal_log_density(d, Value::scalar(x))); },
          g.mean - 12 * sd, g.mean + 12 * sd, 10, 1e-12);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("multivariate densities integrate to 1 by importance sampling") {
  Rng rng(21);
  SUBCASE("GaussianVector") {
    const Eigen::MatrixXd prec = random_spd(3, rng);
    const auto q = GaussianVector::from_precision(Eigen::Vector3d(0.5, -1.0, 2.0), prec);
    const Eigen::MatrixXd cov = q.covariance();
    // Proposal: same mean, covariance inflated by 4.
    const auto wide = GaussianVector::from_covariance(q.mean, 4.0 * cov);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const Value v = Value::vector(wide.sample(rng));
      const double w = std::exp(proposal_log_density(q, v) - proposal_log_density(wide, v));
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 4 * se + 1e-12);
  }
  SUBCASE("InverseWishart") {
    const Eigen::MatrixXd scale = random_spd(2, rng);
    const InverseWishart q{7.0, scale};
    const InverseWishart wide{4.0, scale * (4.0 - 2 - 1) / (7.0 - 2 - 1)};
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const Value v = Value::matrix(wide.sample(rng));
      const double w = std::exp(proposal_log_density(q, v) - proposal_log_density(wide, v));
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) < 4 * se + 1e-12);
  }
}

TEST_CASE("sample_proposal matches the family moments") {
  Rng rng(8);
  const int n = 100000;
  SUBCASE("InverseGamma") {
    const InverseGamma ig{5.0, 2.0};
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_proposal(ig, rng).as_scalar();
    const double mean = 2.0 / 4.0;
    const double sd = std::sqrt(4.0 / (16.0 * 3.0));
    CHECK(std::abs(sum / n - mean) < 4 * sd / std::sqrt(n));
  }
  SUBCASE("InverseWishart") {
    Eigen::Matrix2d scale;
    scale << 2.0, 0.5, 0.5, 1.0;
    const InverseWishart iw{8.0, scale};
    Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
    for (int i = 0; i < n; ++i) sum += sample_proposal(iw, rng).as_matrix();
    const Eigen::Matrix2d expected = scale / (8.0 - 2 - 1);
    CHECK((sum / n - expected).cwiseAbs().maxCoeff() < 0.01);
  }
  SUBCASE("GaussianVector") {
    Eigen::Matrix2d cov;
    cov << 1.0, 0.8, 0.8, 2.0;
    const auto g = GaussianVector::from_covariance(Eigen::Vector2d(1.0, -1.0), cov);
    Eigen::Vector2d s1 = Eigen::Vector2d::Zero();
    Eigen::Matrix2d s2 = Eigen::Matrix2d::Zero();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = sample_proposal(g, rng).as_vector();
      s1 += x;
      s2 += x * x.transpose();
    }
    const Eigen::Vector2d mean = s1 / n;
    const Eigen::Matrix2d c = s2 / n - mean * mean.transpose();
    CHECK((mean - g.mean).cwiseAbs().maxCoeff() < 0.02);
    CHECK((c - cov).cwiseAbs().maxCoeff() < 0.04);
  }
}

TEST_CASE("GaussianVector parameterisations agree") {
  Rng rng(13);
  const Eigen::MatrixXd prec = random_spd(4, rng);
  const Eigen::VectorXd mean = Eigen::VectorXd::LinSpaced(4, -1.0, 1.0);
  const auto a = GaussianVector::from_precision(mean, prec);
  const auto b = GaussianVector::from_covariance(mean, prec.inverse());
  CHECK((a.precision() - prec).norm() < 1e-10);
  CHECK((b.precision() - prec).norm() < 1e-8);
  const Value v = Value::vector(Eigen::Vector4d(0.3, -0.2, 1.0, 0.0));
  CHECK(proposal_log_density(a, v) == doctest::Approx(proposal_log_density(b, v)).epsilon(1e-10));
}

TEST_CASE("Rng is reproducible and streams are distinct") {
  Rng a(42), b(42), c(42, kReservoirStream), d(43);
  bool any_diff_stream = false, any_diff_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    CHECK(x == b());
    any_diff_stream |= x != c();
    any_diff_seed |= x != d();
  }
  CHECK(any_diff_stream);
  CHECK(any_diff_seed);
  CHECK(worker_seed(42, 3) == (42u ^ 3u));
}

TEST_CASE("Rng uniform and normal moments") {
  Rng rng(99);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  double umin = 1.0, umax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
  CHECK(rng.bernoulli(1.0));
  CHECK_FALSE(rng.bernoulli(0.0));
}

TEST_CASE("sampling is deterministic given seed and state") {
  const auto model = build_exponential_target(8, 0.5, 2);
  const auto s = model.initial_state();
  for (std::size_t c = 0; c < model.num_coords(); ++c) {
    Rng r1(5), r2(5);
    const auto d1 = sample_full_conditional(model, s, CoordinateId{c}, r1);
    const auto d2 = sample_full_conditional(model, s, CoordinateId{c}, r2);
    CHECK(d1.value == d2.value);
  }
}

TEST_CASE("Value and ParameterState basics") {
  const Value s = Value::scalar(2.5);
  CHECK(s.kind() == ValueKind::kScalar);
  CHECK(s.as_scalar() == 2.5);
  const Value v = Value::vector(Eigen::Vector3d(1.0, -4.0, 2.0));
  CHECK(v.shape() == Shape::vector(3));
  CHECK(v.max_abs() == 4.0);
  CHECK_THROWS_AS(v.as_scalar(), Error);
  const Value m = Value::matrix(Eigen::Matrix2d::Identity());
  CHECK_THROWS_AS(m.as_vector(), Error);
  CHECK(Value::zeros(Shape::matrix(2, 3)).size() == 6);
  CHECK(Shape::matrix(2, 3).to_string() == "matrix(2x3)");

  ParameterState state({s, v});
  CHECK(state.size() == 2);
  CHECK_THROWS_AS(state.set(CoordinateId{0}, v), Error);
  CHECK_THROWS_AS(state.at(CoordinateId{2}), Error);
  state.set(CoordinateId{0}, Value::scalar(-7.0), Version{1, 3});
  CHECK(state.version(CoordinateId{0}) == Version{1, 3});
  CHECK(state.max_abs() == 7.0);
  ParameterState copy = state;
  copy.set(CoordinateId{0}, Value::scalar(1.0));
  CHECK(state[CoordinateId{0}].as_scalar() == -7.0);
}

TEST_CASE("log_multivariate_gamma reduces to lgamma for p = 1") {
  for (double a : {0.7, 1.0, 3.5, 10.0}) {
    CHECK(log_multivariate_gamma(a, 1) == doctest::Approx(std::lgamma(a)).epsilon(1e-13));
  }
  const double expected = 0.5 * std::log(M_PI) + std::lgamma(3.0) + std::lgamma(2.5);
  CHECK(log_multivariate_gamma(3.0, 2) == doctest::Approx(expected).epsilon(1e-13));
}
