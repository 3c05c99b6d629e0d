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

#include "asyncgibbs/models/gp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {
namespace {

constexpr double kPeriod = 12.0;

double base_curve(double x) {
  return 0.3 + 0.4 * x + 0.4 * std::sin(2.7 * x) + 1.1 / (1.0 + x * x);
}

// Closed-form pieces of (T⁻¹)_ij for T = tridiag(a, b, a), b > 2|a| > 0:
// entry = scale * sign^{|i-j|} e^{-|i-j|λ} u_min(i,j) v_max(i,j), 1-based.
struct TridiagInverseForm {
  double lambda = 0.0;
  double scale = 0.0;
  double sign = 1.0;
  double flip = 1.0;  // -1 when b < 0 (T⁻¹ = -(-T)⁻¹)
  Eigen::Index n = 0;

  TridiagInverseForm(double b, double a, Eigen::Index dim) : n(dim) {
    if (b < 0.0) {
      flip = -1.0;
      b = -b;
      a = -a;
    }
    const double alpha = std::abs(a);
    sign = a > 0.0 ? -1.0 : 1.0;
    lambda = std::acosh(b / (2.0 * alpha));
    const double denom = -std::expm1(-2.0 * static_cast<double>(n + 1) * lambda);
    scale = 0.5 / (alpha * std::sinh(lambda) * denom);
  }

  double u(Eigen::Index i) const { return -std::expm1(-2.0 * static_cast<double>(i) * lambda); }
  double v(Eigen::Index j) const {
    return -std::expm1(-2.0 * static_cast<double>(n + 1 - j) * lambda);
  }
  double entry(Eigen::Index i, Eigen::Index j) const {  // 1-based
    if (i > j) std::swap(i, j);
    const auto k = j - i;
    const double g = (k % 2 ? sign : 1.0) * std::exp(-static_cast<double>(k) * lambda);
    return flip * scale * g * u(i) * v(j);
  }
};

void check_tridiag(double b, double a, Eigen::Index n) {
  if (n < 1) throw Error("tridiagonal Toeplitz inverse: dimension must be positive");
  if (!(std::abs(b) > 2.0 * std::abs(a))) {
    throw NumericalError("tridiagonal Toeplitz inverse needs |b| > 2|a| (got b=" +
                         std::to_string(b) + ", a=" + std::to_string(a) + ")");
  }
}

double log_joint_terms(const GpConfig& cfg, Eigen::Index n, double rss, double prior_quad,
                       double mu, double sigma2, double tau2) {
  if (!(sigma2 > 0.0) || !(tau2 > 0.0)) return -std::numeric_limits<double>::infinity();
  const double half_n = 0.5 * static_cast<double>(n);
  return -(half_n + cfg.a_sigma + 1.0) * std::log(sigma2) - (0.5 * rss + cfg.b_sigma) / sigma2 -
         (half_n + cfg.a_tau + 1.0) * std::log(tau2) - (0.5 * prior_quad + cfg.b_tau) / tau2 -
         0.5 * (mu - cfg.a_mu) * (mu - cfg.a_mu) / cfg.b_mu;
}

}  // namespace

void GpConfig::validate() const {
  if (n < 2) throw ConfigError("model.n", "must be at least 2");
  if (!(rho > 0.0)) throw ConfigError("model.rho", "must be positive");
  if (!(phi > 0.0)) throw ConfigError("model.phi", "must be positive");
  if (block_size < 1 || n % block_size != 0) {
    throw ConfigError("model.block_size", "must divide n");
  }
  if (band_width < 0) throw ConfigError("model.band_width", "must be >= 0 (0 = automatic)");
  if (band_width > 0 && 2 * band_width < block_size) {
    throw ConfigError("model.band_width", "must be at least block_size/2 when set explicitly");
  }
  if (!(b_mu > 0.0)) throw ConfigError("model.b_mu", "prior variance must be positive");
  if (!(a_sigma > 0.0) || !(b_sigma > 0.0)) {
    throw ConfigError("model.a_sigma", "inverse-gamma prior parameters must be positive");
  }
  if (!(a_tau > 0.0) || !(b_tau > 0.0)) {
    throw ConfigError("model.a_tau", "inverse-gamma prior parameters must be positive");
  }
  if (!(noise_sd > 0.0)) throw ConfigError("model.noise_sd", "must be positive");
  if (!(init_sigma2 > 0.0)) throw ConfigError("model.init_sigma2", "must be positive");
  if (!(init_tau2 > 0.0)) throw ConfigError("model.init_tau2", "must be positive");
  const double cells = kPeriod / rho;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) < 1e-9 && rounded >= 1.0 &&
      n % static_cast<Eigen::Index>(rounded) != 0) {
    throw ConfigError("model.n", "must be a multiple of the " +
                                     std::to_string(static_cast<long>(rounded)) +
                                     " grid cells in one period of the truth curve");
  }
}

double gp_truth(double x) {
  double u = std::fmod(x + 3.0, kPeriod);
  if (u < 0.0) u += kPeriod;
  return u <= 6.0 ? base_curve(u - 3.0) : base_curve(9.0 - u);
}

GpData generate_gp_data(const GpConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed, kDataStream);
  GpData data;
  data.x.resize(config.n);
  data.y.resize(config.n);
  const double half = static_cast<double>(config.n / 2);
  for (Eigen::Index i = 0; i < config.n; ++i) {
    data.x(i) = (static_cast<double>(i) - half) * config.rho;
    data.y(i) = gp_truth(data.x(i)) + config.noise_sd * rng.normal();
  }
  return data;
}

void write_gp_csv(const std::filesystem::path& path, const GpData& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "x,y\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.x.size(); ++i) out << data.x(i) << ',' << data.y(i) << '\n';
}

GpData read_gp_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "x,y") throw Error(path.string() + ": expected header 'x,y'");
  std::vector<double> xs, ys;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(ss >> x >> comma >> y) || comma != ',') {
      throw Error(path.string() + ":" + std::to_string(row) + ": malformed row");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  GpData data;
  data.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return data;
}

Eigen::MatrixXd ToeplitzInverse::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    m(i, i) = (i == 0 || i == dim - 1) ? d0 : b;
    if (i + 1 < dim) m(i, i + 1) = m(i + 1, i) = a;
  }
  return m;
}

Eigen::VectorXd ToeplitzInverse::apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double s = ((i == 0 || i == dim - 1) ? d0 : b) * v(i);
    if (i > 0) s += a * v(i - 1);
    if (i + 1 < dim) s += a * v(i + 1);
    out(i) = s;
  }
  return out;
}

double ToeplitzInverse::quadratic(const Eigen::VectorXd& v) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    s += ((i == 0 || i == dim - 1) ? d0 : b) * v(i) * v(i);
    if (i + 1 < dim) s += 2.0 * a * v(i) * v(i + 1);
  }
  return s;
}

ToeplitzInverse toeplitz_exp_inverse(double phi, double rho, Eigen::Index n) {
  const double t = phi * rho;
  if (!(t > 0.0)) throw Error("toeplitz_exp_inverse: phi * rho must be positive");
  if (n < 2) throw Error("toeplitz_exp_inverse: dimension must be at least 2");
  ToeplitzInverse q;
  q.dim = n;
  q.b = 1.0 / std::tanh(t);
  q.a = -0.5 / std::sinh(t);
  // Exact corner for every n: 1 / (1 - e^{-2φρ}).
  q.d0 = -1.0 / std::expm1(-2.0 * t);
  return q;
}

Eigen::MatrixXd exp_correlation(double phi, double rho, Eigen::Index n) {
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      h(i, j) = std::exp(-phi * rho * static_cast<double>(std::abs(i - j)));
    }
  }
  return h;
}

double tridiag_toeplitz_inverse_entry(double b, double a, Eigen::Index n, Eigen::Index i,
                                      Eigen::Index j) {
  check_tridiag(b, a, n);
  if (a == 0.0) return i == j ? 1.0 / b : 0.0;
  return TridiagInverseForm(b, a, n).entry(i + 1, j + 1);
}

Eigen::MatrixXd tridiag_toeplitz_inverse_dense(double b, double a, Eigen::Index n) {
  check_tridiag(b, a, n);
  if (a == 0.0) return Eigen::MatrixXd::Identity(n, n) / b;
  const TridiagInverseForm form(b, a, n);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) m(i, j) = m(j, i) = form.entry(i + 1, j + 1);
  }
  return m;
}

Eigen::Index tridiag_toeplitz_band_width(double b, double a, Eigen::Index n, double tol) {
  check_tridiag(b, a, n);
  if (a == 0.0) return 0;
  const TridiagInverseForm form(b, a, n);
  // |entry| at distance k is at most 0.5 e^{-kλ} / (|a| sinh λ).
  const double peak = 0.5 / (std::abs(a) * std::sinh(form.lambda));
  Eigen::Index w = 0;
  while (w < n - 1 && peak * std::exp(-static_cast<double>(w + 1) * form.lambda) >= tol) ++w;
  return w;
}

Eigen::VectorXd tridiag_toeplitz_inverse_apply(double b, double a, Eigen::Index n,
                                               const Eigen::VectorXd& rhs,
                                               Eigen::Index band_width) {
  check_tridiag(b, a, n);
  if (rhs.size() != n) throw Error("tridiagonal Toeplitz apply: rhs has the wrong length");
  if (a == 0.0) return rhs / b;
  if (band_width < 0) band_width = tridiag_toeplitz_band_width(b, a, n);
  band_width = std::min(band_width, n - 1);
  const TridiagInverseForm form(b, a, n);
  Eigen::VectorXd u(n), v(n), g(band_width + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i) = form.u(i + 1);
    v(i) = form.v(i + 1);
  }
  for (Eigen::Index k = 0; k <= band_width; ++k) {
    g(k) = (k % 2 ? form.sign : 1.0) * std::exp(-static_cast<double>(k) * form.lambda);
  }
  const double c = form.flip * form.scale;
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - band_width);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + band_width);
    double s = 0.0;
    for (Eigen::Index j = lo; j < i; ++j) s += g(i - j) * u(j) * rhs(j);
    double t = 0.0;
    for (Eigen::Index j = i; j <= hi; ++j) t += g(j - i) * v(j) * rhs(j);
    out(i) = c * (v(i) * s + u(i) * t);
  }
  return out;
}

GpSufficientSums gp_sufficient_sums(const ToeplitzInverse& q, const Eigen::VectorXd& theta,
                                    const Eigen::VectorXd& y) {
  if (theta.size() != q.dim || y.size() != q.dim) {
    throw Error("gp_sufficient_sums: length mismatch");
  }
  GpSufficientSums s;
  s.n = q.dim;
  s.rss = (y - theta).squaredNorm();
  const Eigen::VectorXd qtheta = q.apply(theta);
  s.theta_q_theta = theta.dot(qtheta);
  s.one_q_theta = qtheta.sum();
  s.one_q_one = 2.0 * q.d0 + static_cast<double>(q.dim - 2) * q.b +
                2.0 * static_cast<double>(q.dim - 1) * q.a;
  return s;
}

GaussianScalar gp_mu_conditional(const GpConfig& config, const GpSufficientSums& sums,
                                 double tau2) {
  const double precision = sums.one_q_one / tau2 + 1.0 / config.b_mu;
  if (!(precision > 0.0)) throw NumericalError("mu conditional has non-positive precision");
  const double mean = (sums.one_q_theta / tau2 + config.a_mu / config.b_mu) / precision;
  return {mean, 1.0 / precision};
}

InverseGamma gp_sigma2_conditional(const GpConfig& config, const GpSufficientSums& sums) {
  InverseGamma ig{config.a_sigma + 0.5 * static_cast<double>(sums.n),
                  config.b_sigma + 0.5 * sums.rss};
  if (!(ig.shape > 0.0) || !(ig.scale > 0.0)) {
    throw NumericalError("sigma2 conditional has non-positive parameters");
  }
  return ig;
}

InverseGamma gp_tau2_conditional(const GpConfig& config, const GpSufficientSums& sums, double mu) {
  const double quad = sums.theta_q_theta - 2.0 * mu * sums.one_q_theta + mu * mu * sums.one_q_one;
  InverseGamma ig{config.a_tau + 0.5 * static_cast<double>(sums.n), config.b_tau + 0.5 * quad};
  if (!(ig.shape > 0.0) || !(ig.scale > 0.0)) {
    throw NumericalError("tau2 conditional has non-positive parameters");
  }
  return ig;
}

Eigen::MatrixXd GpBlockConditional::covariance() const {
  return tridiag_toeplitz_inverse_dense(diag, off, mean.size());
}

Eigen::MatrixXd GpBlockConditional::precision_factor() const {
  const Eigen::Index k = mean.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  double prev = std::sqrt(diag);
  l(0, 0) = prev;
  for (Eigen::Index i = 1; i < k; ++i) {
    const double c = off / prev;
    const double d = diag - c * c;
    if (!(d > 0.0)) throw NumericalError("theta block precision is not positive definite");
    l(i, i - 1) = c;
    prev = std::sqrt(d);
    l(i, i) = prev;
  }
  return l;
}

GpModel::GpModel(GpConfig config, GpData data) : config_(config), data_(std::move(data)) {
  config_.validate();
  if (data_.y.size() != config_.n || data_.x.size() != config_.n) {
    throw ConfigError("data", "expected " + std::to_string(config_.n) + " observations, got " +
                                  std::to_string(data_.y.size()));
  }
  if (!data_.y.allFinite()) throw ConfigError("data", "observations must be finite");
  q_ = toeplitz_exp_inverse(config_.phi, config_.rho, config_.n);
  num_blocks_ = config_.n / config_.block_size;
}

Shape GpModel::shape(CoordinateId c) const {
  if (c.index < static_cast<std::size_t>(num_blocks_)) return Shape::vector(config_.block_size);
  if (c.index < num_coords()) return Shape::scalar();
  throw Error("GpModel: coordinate out of range");
}

std::string GpModel::coord_name(CoordinateId c) const {
  if (c == mu_coord()) return "mu";
  if (c == sigma2_coord()) return "sigma2";
  if (c == tau2_coord()) return "tau2";
  return "theta_block[" + std::to_string(c.index) + "]";
}

std::vector<CoordinateId> GpModel::top_level_coords() const {
  return {mu_coord(), sigma2_coord(), tau2_coord()};
}

Eigen::VectorXd GpModel::theta(const ParameterState& state) const {
  Eigen::VectorXd t(config_.n);
  for (Eigen::Index k = 0; k < num_blocks_; ++k) {
    t.segment(k * config_.block_size, config_.block_size) =
        state.at(CoordinateId{static_cast<std::size_t>(k)}).as_vector();
  }
  return t;
}

ParameterState GpModel::initial_state() const {
  std::vector<Value> values;
  for (Eigen::Index k = 0; k < num_blocks_; ++k) {
    values.push_back(
        Value::vector(Eigen::VectorXd::Constant(config_.block_size, config_.init_theta)));
  }
  values.push_back(Value::scalar(config_.init_mu));
  values.push_back(Value::scalar(config_.init_sigma2));
  values.push_back(Value::scalar(config_.init_tau2));
  return ParameterState(std::move(values));
}

double GpModel::log_joint(const ParameterState& state) const {
  const Eigen::VectorXd t = theta(state);
  const double mu = state.at(mu_coord()).as_scalar();
  const double rss = (data_.y - t).squaredNorm();
  const double quad = q_.quadratic(t.array() - mu);
  return log_joint_terms(config_, config_.n, rss, quad, mu, state.at(sigma2_coord()).as_scalar(),
                         state.at(tau2_coord()).as_scalar());
}

double GpModel::log_joint_ratio(const ParameterState& state, CoordinateId c,
                                const Value& v) const {
  if (c.index >= static_cast<std::size_t>(num_blocks_)) {
    return TargetModel::log_joint_ratio(state, c, v);
  }
  const double mu = state.at(mu_coord()).as_scalar();
  const double sigma2 = state.at(sigma2_coord()).as_scalar();
  const double tau2 = state.at(tau2_coord()).as_scalar();
  const Eigen::Index k = config_.block_size;
  const Eigen::Index start = static_cast<Eigen::Index>(c.index) * k;
  const Eigen::Index n = config_.n;
  const auto old = state.at(c).as_vector();
  const auto next = v.as_vector();
  auto z_at = [&](Eigen::Index i) -> double {  // θ_i - μ from the current state
    const auto blk = i / k;
    return state.at(CoordinateId{static_cast<std::size_t>(blk)}).as_vector()(i - blk * k) - mu;
  };
  auto diag_at = [&](Eigen::Index i) { return (i == 0 || i == n - 1) ? q_.d0 : q_.b; };

  double cross = 0.0;  // δᵀ (Q z)_B
  double quad = 0.0;   // δᵀ Q_BB δ
  double lik = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = start + r;
    const double delta = next(r) - old(r);
    double qz = diag_at(i) * (old(r) - mu);
    qz += q_.a * (r > 0 ? old(r - 1) - mu : (i > 0 ? z_at(i - 1) : 0.0));
    qz += q_.a * (r + 1 < k ? old(r + 1) - mu : (i + 1 < n ? z_at(i + 1) : 0.0));
    cross += delta * qz;
    quad += diag_at(i) * delta * delta;
    if (r + 1 < k) quad += 2.0 * q_.a * delta * (next(r + 1) - old(r + 1));
    const double e_new = data_.y(i) - next(r);
    const double e_old = data_.y(i) - old(r);
    lik += e_new * e_new - e_old * e_old;
  }
  return -(2.0 * cross + quad) / (2.0 * tau2) - lik / (2.0 * sigma2);
}

GpBlockConditional GpModel::theta_block_conditional(const ParameterState& state,
                                                    Eigen::Index block) const {
  if (block < 0 || block >= num_blocks_) throw Error("GpModel: block out of range");
  const double mu = state.at(mu_coord()).as_scalar();
  const double sigma2 = state.at(sigma2_coord()).as_scalar();
  const double tau2 = state.at(tau2_coord()).as_scalar();
  if (!(sigma2 > 0.0) || !(tau2 > 0.0)) {
    throw NumericalError("theta conditional needs sigma2 > 0 and tau2 > 0");
  }
  const Eigen::Index k = config_.block_size;
  const Eigen::Index start = block * k;
  const Eigen::Index n = config_.n;

  GpBlockConditional out;
  out.diag = q_.b / tau2 + 1.0 / sigma2;
  out.off = q_.a / tau2;
  Eigen::VectorXd rhs(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = start + r;
    const double q_one = (i == 0 || i == n - 1) ? q_.b + q_.a : q_.b + 2.0 * q_.a;
    rhs(r) = data_.y(i) / sigma2 + mu * q_one / tau2;
  }
  if (block > 0) {
    rhs(0) -= out.off * state.at(CoordinateId{static_cast<std::size_t>(block - 1)}).as_vector()(k - 1);
  }
  if (block + 1 < num_blocks_) {
    rhs(k - 1) -= out.off * state.at(CoordinateId{static_cast<std::size_t>(block + 1)}).as_vector()(0);
  }
  out.band_width = config_.band_width > 0
                       ? std::min(config_.band_width, k - 1)
                       : tridiag_toeplitz_band_width(out.diag, out.off, k);
  out.mean = tridiag_toeplitz_inverse_apply(out.diag, out.off, k, rhs, out.band_width);
  return out;
}

Draw GpModel::sample_full_conditional(const ParameterState& state, CoordinateId c,
                                      Rng& rng) const {
  if (c.index < static_cast<std::size_t>(num_blocks_)) {
    GpBlockConditional cond = theta_block_conditional(state, static_cast<Eigen::Index>(c.index));
    const Eigen::Index k = config_.block_size;
    // P_BB = L Lᵀ with L lower bidiagonal; θ = mean + L⁻ᵀ z.
    Eigen::VectorXd l(k), sub(k);
    l(0) = std::sqrt(cond.diag);
    sub(0) = 0.0;
    for (Eigen::Index i = 1; i < k; ++i) {
      sub(i) = cond.off / l(i - 1);
      const double d = cond.diag - sub(i) * sub(i);
      if (!(d > 0.0)) throw NumericalError("theta block precision is not positive definite");
      l(i) = std::sqrt(d);
    }
    Eigen::VectorXd z(k);
    for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
    Eigen::VectorXd x(k);
    x(k - 1) = z(k - 1) / l(k - 1);
    for (Eigen::Index i = k - 2; i >= 0; --i) x(i) = (z(i) - sub(i + 1) * x(i + 1)) / l(i);
    Eigen::VectorXd value = cond.mean + x;
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(k, k);
    factor.diagonal() = l;
    for (Eigen::Index i = 1; i < k; ++i) factor(i, i - 1) = sub(i);
    return {Value::vector(std::move(value)),
            GaussianVector::from_precision_factor(std::move(cond.mean), std::move(factor))};
  }

  const Eigen::VectorXd t = theta(state);
  const GpSufficientSums sums = gp_sufficient_sums(q_, t, data_.y);
  if (c == mu_coord()) {
    const GaussianScalar g = gp_mu_conditional(config_, sums, state.at(tau2_coord()).as_scalar());
    return {Value::scalar(g.mean + std::sqrt(g.variance) * rng.normal()), g};
  }
  if (c == sigma2_coord()) {
    const InverseGamma ig = gp_sigma2_conditional(config_, sums);
    return {Value::scalar(ig.sample(rng)), ig};
  }
  if (c == tau2_coord()) {
    const InverseGamma ig = gp_tau2_conditional(config_, sums, state.at(mu_coord()).as_scalar());
    return {Value::scalar(ig.sample(rng)), ig};
  }
  throw Error("GpModel: coordinate out of range");
}

std::vector<std::string> GpModel::monitor_names() const {
  std::vector<std::string> names{"mu", "sigma2", "tau2"};
  for (Eigen::Index i = 0; i < config_.n; ++i) names.push_back("theta[" + std::to_string(i) + "]");
  return names;
}

Eigen::VectorXd GpModel::monitor(const ParameterState& state) const {
  Eigen::VectorXd out(config_.n + 3);
  out(0) = state.at(mu_coord()).as_scalar();
  out(1) = state.at(sigma2_coord()).as_scalar();
  out(2) = state.at(tau2_coord()).as_scalar();
  out.tail(config_.n) = theta(state);
  return out;
}

GpDensePosterior gp_dense_posterior(const GpConfig& config, const Eigen::VectorXd& y, double mu,
                                    double sigma2, double tau2) {
  const ToeplitzInverse q = toeplitz_exp_inverse(config.phi, config.rho, y.size());
  Eigen::MatrixXd precision = q.dense() / tau2;
  precision.diagonal().array() += 1.0 / sigma2;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("dense GP posterior is not SPD");
  const Eigen::VectorXd rhs =
      y / sigma2 + q.apply(Eigen::VectorXd::Constant(y.size(), mu)) / tau2;
  GpDensePosterior out;
  out.mean = llt.solve(rhs);
  out.covariance = llt.solve(Eigen::MatrixXd::Identity(y.size(), y.size()));
  return out;
}

}  // namespace asyncgibbs
