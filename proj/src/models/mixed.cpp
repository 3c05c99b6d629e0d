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

#include "asyncgibbs/models/mixed.hpp"

#include <cmath>
#include <fstream>

#include "asyncgibbs/core/error.hpp"
#include "json.hpp"

namespace asyncgibbs {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(where + ": expected " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(where + ": expected " + std::to_string(cols) + " columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not SPD");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

// ‖y - Fβ‖² from precomputed yᵀy, Fᵀy, FᵀF.
double resid_term(double yty, const Eigen::VectorXd& fty, const Eigen::MatrixXd& ftf,
                  const Eigen::VectorXd& beta) {
  return yty - 2.0 * fty.dot(beta) + beta.dot(ftf * beta);
}

}  // namespace

void MixedConfig::validate() const {
  if (n < 1) throw ConfigError("model.n", "must be positive");
  if (d < 1) throw ConfigError("model.d", "must be positive");
  if (p < 0 || T <= p) throw ConfigError("model.T", "must exceed model.p");
  if (!(kappa_mu > 0.0)) throw ConfigError("model.kappa_mu", "must be positive");
  if (!(kappa_gamma > 0.0)) throw ConfigError("model.kappa_gamma", "must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("model.epsilon", "must be positive");
  if (audit_interval < 1) throw ConfigError("model.audit_interval", "must be positive");
}

MixedDataset generate_mixed_data(const MixedConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed, kDataStream);
  const Eigen::Index d = config.d, q = config.q();
  auto normals = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
    return m;
  };

  MixedDataset out;
  MixedTruth& t = out.truth;
  t.mu = std::sqrt(config.kappa_mu) * normals(d, 1).col(0);
  t.gamma = std::sqrt(config.kappa_gamma) * normals(q, 1).col(0);
  t.Sigma = InverseWishart{static_cast<double>(d + 1), Eigen::MatrixXd::Identity(d, d)}.sample(rng);
  t.nu = InverseGamma{0.5 * config.epsilon, 0.5 * config.epsilon}.sample(rng);
  const Eigen::MatrixXd sigma_l = Eigen::LLT<Eigen::MatrixXd>(t.Sigma).matrixL();

  MixedData& data = out.data;
  data.d = d;
  data.q = q;
  const double noise = std::sqrt(t.nu);
  for (Eigen::Index i = 0; i < config.n; ++i) {
    Eigen::VectorXd beta = t.mu + sigma_l * normals(d, 1).col(0);
    Eigen::MatrixXd F = normals(q, d);
    Eigen::MatrixXd W = normals(q, q);
    Eigen::VectorXd y = F * beta + W * t.gamma + noise * normals(q, 1).col(0);
    t.beta.push_back(std::move(beta));
    data.F.push_back(std::move(F));
    data.W.push_back(std::move(W));
    data.y.push_back(std::move(y));
  }
  return out;
}

void write_mixed_jsonl(const std::filesystem::path& path, const MixedData& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << json{{"d", data.d}, {"q", data.q}, {"n", data.n()}}.dump() << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const auto& y = data.y[static_cast<std::size_t>(i)];
    json rec{{"i", i},
             {"y", std::vector<double>(y.data(), y.data() + y.size())},
             {"F", matrix_to_json(data.F[static_cast<std::size_t>(i)])},
             {"W", matrix_to_json(data.W[static_cast<std::size_t>(i)])}};
    out << rec.dump() << '\n';
  }
}

MixedData read_mixed_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty file");
  MixedData data;
  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    data.d = header.at("d").get<Eigen::Index>();
    data.q = header.at("q").get<Eigen::Index>();
    expected = header.at("n").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(path.string() + ":1: bad header: " + e.what());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      const json rec = json::parse(line);
      const auto ys = rec.at("y").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(ys.size()) != data.q) throw Error(where + ": y has wrong length");
      data.y.emplace_back(Eigen::Map<const Eigen::VectorXd>(ys.data(), data.q));
      data.F.push_back(matrix_from_json(rec.at("F"), data.q, data.d, where + " F"));
      data.W.push_back(matrix_from_json(rec.at("W"), data.q, data.q, where + " W"));
    } catch (const json::exception& e) {
      throw Error(where + ": " + e.what());
    }
  }
  if (data.y.size() != expected) {
    throw Error(path.string() + ": header says " + std::to_string(expected) + " users, found " +
                std::to_string(data.y.size()));
  }
  return data;
}

MixedModel::MixedModel(MixedConfig config, MixedData data)
    : config_(config), data_(std::move(data)) {
  config_.validate();
  if (data_.n() != config_.n) {
    throw ConfigError("data", "expected " + std::to_string(config_.n) + " users, got " +
                                  std::to_string(data_.n()));
  }
  if (data_.d != config_.d || data_.q != config_.q()) {
    throw ConfigError("data", "dimensions do not match model.d and model.T - model.p");
  }
  const Eigen::Index q = data_.q;
  WtW_sum_ = Eigen::MatrixXd::Zero(q, q);
  Wty_sum_ = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < n(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const auto& F = data_.F[u];
    const auto& W = data_.W[u];
    const auto& y = data_.y[u];
    if (F.rows() != q || F.cols() != data_.d || W.rows() != q || W.cols() != q || y.size() != q) {
      throw ConfigError("data", "user " + std::to_string(i) + " has mismatched dimensions");
    }
    if (!F.allFinite() || !W.allFinite() || !y.allFinite()) {
      throw ConfigError("data", "user " + std::to_string(i) + " has non-finite entries");
    }
    FtF_.push_back(F.transpose() * F);
    WtF_.push_back(W.transpose() * F);
    Fty_.push_back(F.transpose() * y);
    Wty_.push_back(W.transpose() * y);
    yty_.push_back(y.squaredNorm());
    WtW_sum_ += W.transpose() * W;
    Wty_sum_ += Wty_.back();
  }
}

StatCache MixedModel::compute_cache(const ParameterState& state) const {
  const Eigen::Index d = data_.d;
  StatCache c;
  c.beta_sum = Eigen::VectorXd::Zero(d);
  c.S_outer = Eigen::MatrixXd::Zero(d, d);
  c.g = Wty_sum_;
  c.resid_sq = 0.0;
  for (Eigen::Index i = 0; i < n(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Eigen::VectorXd b = state.at(beta_coord(i)).as_vector();
    c.beta_sum += b;
    c.S_outer += b * b.transpose();
    c.g -= WtF_[u] * b;
    c.resid_sq += resid_term(yty_[u], Fty_[u], FtF_[u], b);
  }
  return c;
}

double MixedModel::cached_l(const StatCache& cache, const Eigen::VectorXd& gamma) const {
  return cache.resid_sq - 2.0 * gamma.dot(cache.g) + gamma.dot(WtW_sum_ * gamma);
}

Eigen::MatrixXd MixedModel::cached_S(const StatCache& cache, const Eigen::VectorXd& mu) const {
  return cache.S_outer - mu * cache.beta_sum.transpose() - cache.beta_sum * mu.transpose() +
         static_cast<double>(n()) * mu * mu.transpose();
}

void MixedModel::cache_update(StatCache& cache, Eigen::Index i, const Eigen::VectorXd& beta_old,
                              const Eigen::VectorXd& beta_new) const {
  const auto u = static_cast<std::size_t>(i);
  const Eigen::VectorXd delta = beta_new - beta_old;
  cache.beta_sum += delta;
  cache.S_outer += beta_new * beta_new.transpose() - beta_old * beta_old.transpose();
  cache.g -= WtF_[u] * delta;
  cache.resid_sq += resid_term(yty_[u], Fty_[u], FtF_[u], beta_new) -
                    resid_term(yty_[u], Fty_[u], FtF_[u], beta_old);
  ++cache.updates;
}

double MixedModel::audit(ParameterState& state) const {
  auto* cache = dynamic_cast<StatCache*>(state.cache());
  if (!cache) throw Error("MixedModel: state has no cache");
  StatCache fresh = compute_cache(state);
  auto rel = [](double diff, double scale) { return diff / (1.0 + scale); };
  double drift = rel((cache->beta_sum - fresh.beta_sum).norm(), fresh.beta_sum.norm());
  drift = std::max(drift, rel((cache->S_outer - fresh.S_outer).norm(), fresh.S_outer.norm()));
  drift = std::max(drift, rel((cache->g - fresh.g).norm(), fresh.g.norm()));
  drift = std::max(drift, rel(std::abs(cache->resid_sq - fresh.resid_sq), std::abs(fresh.resid_sq)));
  fresh.updates = cache->updates;
  fresh.audits = cache->audits + 1;
  fresh.max_drift = std::max(cache->max_drift, drift);
  *cache = std::move(fresh);
  return drift;
}

const StatCache& MixedModel::cache_of(const ParameterState& state) const {
  const auto* cache = dynamic_cast<const StatCache*>(state.cache());
  if (!cache) throw Error("MixedModel: state has no cache (use initial_state_with_cache)");
  return *cache;
}

GaussianVector MixedModel::beta_conditional(const ParameterState& state, Eigen::Index i) const {
  const auto u = static_cast<std::size_t>(i);
  const double nu = state.at(nu_coord()).as_scalar();
  const Eigen::MatrixXd sigma_inv = spd_inverse(state.at(sigma_coord()).as_matrix(), "Sigma");
  const Eigen::VectorXd mu = state.at(mu_coord()).as_vector();
  const Eigen::VectorXd gamma = state.at(gamma_coord()).as_vector();
  const Eigen::MatrixXd precision = FtF_[u] / nu + sigma_inv;
  const Eigen::VectorXd rhs = (Fty_[u] - WtF_[u].transpose() * gamma) / nu + sigma_inv * mu;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("beta precision is not SPD");
  return GaussianVector::from_precision_factor(llt.solve(rhs), llt.matrixL());
}

GaussianVector MixedModel::mu_conditional(const ParameterState& state) const {
  const StatCache& cache = cache_of(state);
  const Eigen::Index d = data_.d;
  const Eigen::MatrixXd sigma_inv = spd_inverse(state.at(sigma_coord()).as_matrix(), "Sigma");
  const Eigen::MatrixXd precision = static_cast<double>(n()) * sigma_inv +
                                    Eigen::MatrixXd::Identity(d, d) / config_.kappa_mu;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("mu precision is not SPD");
  return GaussianVector::from_precision_factor(llt.solve(sigma_inv * cache.beta_sum),
                                               llt.matrixL());
}

InverseWishart MixedModel::sigma_conditional(const ParameterState& state) const {
  const StatCache& cache = cache_of(state);
  const Eigen::Index d = data_.d;
  Eigen::MatrixXd scale =
      Eigen::MatrixXd::Identity(d, d) + cached_S(cache, state.at(mu_coord()).as_vector());
  scale = 0.5 * (scale + scale.transpose());
  return {static_cast<double>(d + 1 + n()), std::move(scale)};
}

GaussianVector MixedModel::gamma_conditional(const ParameterState& state) const {
  const StatCache& cache = cache_of(state);
  const double nu = state.at(nu_coord()).as_scalar();
  const Eigen::Index q = data_.q;
  const Eigen::MatrixXd precision =
      WtW_sum_ / nu + Eigen::MatrixXd::Identity(q, q) / config_.kappa_gamma;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("gamma precision is not SPD");
  return GaussianVector::from_precision_factor(llt.solve(cache.g / nu), llt.matrixL());
}

InverseGamma MixedModel::nu_conditional(const ParameterState& state) const {
  const StatCache& cache = cache_of(state);
  const double l = cached_l(cache, state.at(gamma_coord()).as_vector());
  const double nq = static_cast<double>(n() * data_.q);
  InverseGamma ig{0.5 * (config_.epsilon + nq), 0.5 * (config_.epsilon + std::max(l, 0.0))};
  return ig;
}

double MixedModel::log_local(const ParameterState& state, Eigen::Index i,
                             const Eigen::VectorXd& beta) const {
  const auto u = static_cast<std::size_t>(i);
  const double nu = state.at(nu_coord()).as_scalar();
  const Eigen::VectorXd gamma = state.at(gamma_coord()).as_vector();
  const Eigen::VectorXd r =
      data_.y[u] - data_.F[u] * beta - data_.W[u] * gamma;
  const Eigen::VectorXd z = beta - state.at(mu_coord()).as_vector();
  Eigen::LLT<Eigen::MatrixXd> llt(state.at(sigma_coord()).as_matrix());
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return -0.5 * r.squaredNorm() / nu - 0.5 * z.dot(llt.solve(z));
}

ParameterState MixedModel::make_state(const std::vector<Eigen::VectorXd>& beta,
                                      Eigen::VectorXd mu, Eigen::MatrixXd Sigma,
                                      Eigen::VectorXd gamma, double nu) const {
  if (static_cast<Eigen::Index>(beta.size()) != n()) throw Error("make_state: wrong number of betas");
  std::vector<Value> values;
  for (const auto& b : beta) values.push_back(Value::vector(b));
  values.push_back(Value::vector(std::move(mu)));
  values.push_back(Value::matrix(std::move(Sigma)));
  values.push_back(Value::vector(std::move(gamma)));
  values.push_back(Value::scalar(nu));
  ParameterState state(std::move(values));
  state.set_cache(make_cache(state));
  return state;
}

Shape MixedModel::shape(CoordinateId c) const {
  if (c.index < static_cast<std::size_t>(n()) || c == mu_coord()) return Shape::vector(data_.d);
  if (c == sigma_coord()) return Shape::matrix(data_.d, data_.d);
  if (c == gamma_coord()) return Shape::vector(data_.q);
  if (c == nu_coord()) return Shape::scalar();
  throw Error("MixedModel: coordinate out of range");
}

std::string MixedModel::coord_name(CoordinateId c) const {
  if (c == mu_coord()) return "mu";
  if (c == sigma_coord()) return "Sigma";
  if (c == gamma_coord()) return "gamma";
  if (c == nu_coord()) return "nu";
  return "beta[" + std::to_string(c.index) + "]";
}

std::vector<CoordinateId> MixedModel::top_level_coords() const {
  return {mu_coord(), sigma_coord(), gamma_coord(), nu_coord()};
}

ParameterState MixedModel::initial_state() const {
  std::vector<Value> values(static_cast<std::size_t>(n()),
                            Value::vector(Eigen::VectorXd::Zero(data_.d)));
  values.push_back(Value::vector(Eigen::VectorXd::Zero(data_.d)));
  values.push_back(Value::matrix(Eigen::MatrixXd::Identity(data_.d, data_.d)));
  values.push_back(Value::vector(Eigen::VectorXd::Zero(data_.q)));
  values.push_back(Value::scalar(1.0));
  return ParameterState(std::move(values));
}

double MixedModel::log_joint(const ParameterState& state) const {
  const StatCache fresh = state.cache() ? StatCache{} : compute_cache(state);
  const StatCache& cache = state.cache() ? cache_of(state) : fresh;
  const double nu = state.at(nu_coord()).as_scalar();
  const Eigen::MatrixXd& Sigma = state.at(sigma_coord()).as_matrix();
  const Eigen::VectorXd mu = state.at(mu_coord()).as_vector();
  const Eigen::VectorXd gamma = state.at(gamma_coord()).as_vector();
  if (!(nu > 0.0)) return -std::numeric_limits<double>::infinity();
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  const Eigen::Index d = data_.d;
  const double nn = static_cast<double>(n());
  const double nq = nn * static_cast<double>(data_.q);
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));

  const double lik = -0.5 * nq * std::log(nu) - 0.5 * cached_l(cache, gamma) / nu;
  const double beta_prior =
      -0.5 * nn * log_det - 0.5 * (sigma_inv * cached_S(cache, mu)).trace();
  const double mu_prior = -0.5 * mu.squaredNorm() / config_.kappa_mu;
  const double gamma_prior = -0.5 * gamma.squaredNorm() / config_.kappa_gamma;
  const double dd = static_cast<double>(d);
  const double sigma_prior = -0.5 * (2.0 * dd + 2.0) * log_det - 0.5 * sigma_inv.trace();
  const double nu_prior =
      -(0.5 * config_.epsilon + 1.0) * std::log(nu) - 0.5 * config_.epsilon / nu;
  return lik + beta_prior + mu_prior + gamma_prior + sigma_prior + nu_prior;
}

double MixedModel::log_joint_ratio(const ParameterState& state, CoordinateId c,
                                   const Value& v) const {
  if (c.index < static_cast<std::size_t>(n())) {
    const auto i = static_cast<Eigen::Index>(c.index);
    const Eigen::VectorXd next = v.as_vector();
    const Eigen::VectorXd cur = state.at(c).as_vector();
    return log_local(state, i, next) - log_local(state, i, cur);
  }
  // Top-level values do not enter the cache, so the default is consistent.
  return TargetModel::log_joint_ratio(state, c, v);
}

Draw MixedModel::sample_full_conditional(const ParameterState& state, CoordinateId c,
                                         Rng& rng) const {
  if (c.index < static_cast<std::size_t>(n())) {
    GaussianVector g = beta_conditional(state, static_cast<Eigen::Index>(c.index));
    Eigen::VectorXd x = g.sample(rng);
    return {Value::vector(std::move(x)), std::move(g)};
  }
  if (c == mu_coord()) {
    GaussianVector g = mu_conditional(state);
    Eigen::VectorXd x = g.sample(rng);
    return {Value::vector(std::move(x)), std::move(g)};
  }
  if (c == sigma_coord()) {
    InverseWishart iw = sigma_conditional(state);
    Eigen::MatrixXd x = iw.sample(rng);
    return {Value::matrix(std::move(x)), std::move(iw)};
  }
  if (c == gamma_coord()) {
    GaussianVector g = gamma_conditional(state);
    Eigen::VectorXd x = g.sample(rng);
    return {Value::vector(std::move(x)), std::move(g)};
  }
  if (c == nu_coord()) {
    const InverseGamma ig = nu_conditional(state);
    return {Value::scalar(ig.sample(rng)), ig};
  }
  throw Error("MixedModel: coordinate out of range");
}

std::optional<std::size_t> MixedModel::data_ref(CoordinateId c) const {
  if (c.index < static_cast<std::size_t>(n())) return c.index;
  return std::nullopt;
}

std::unique_ptr<ModelCache> MixedModel::make_cache(const ParameterState& state) const {
  return std::make_unique<StatCache>(compute_cache(state));
}

void MixedModel::on_update(ParameterState& state, CoordinateId c, const Value& old_value) const {
  if (c.index >= static_cast<std::size_t>(n())) return;
  auto* cache = dynamic_cast<StatCache*>(state.cache());
  if (!cache) return;
  cache_update(*cache, static_cast<Eigen::Index>(c.index), old_value.as_vector(),
               state.at(c).as_vector());
  if (cache->updates % config_.audit_interval == 0) audit(state);
}

std::vector<std::string> MixedModel::monitor_names() const {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < data_.d; ++k) names.push_back("mu[" + std::to_string(k) + "]");
  for (Eigen::Index k = 0; k < data_.q; ++k) names.push_back("gamma[" + std::to_string(k) + "]");
  names.push_back("nu");
  for (Eigen::Index r = 0; r < data_.d; ++r) {
    for (Eigen::Index s = 0; s <= r; ++s) {
      names.push_back("Sigma[" + std::to_string(r) + "," + std::to_string(s) + "]");
    }
  }
  return names;
}

Eigen::VectorXd MixedModel::monitor(const ParameterState& state) const {
  const Eigen::Index d = data_.d, q = data_.q;
  Eigen::VectorXd out(d + q + 1 + d * (d + 1) / 2);
  out.head(d) = state.at(mu_coord()).as_vector();
  out.segment(d, q) = state.at(gamma_coord()).as_vector();
  out(d + q) = state.at(nu_coord()).as_scalar();
  const Eigen::MatrixXd& Sigma = state.at(sigma_coord()).as_matrix();
  Eigen::Index at = d + q + 1;
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index s = 0; s <= r; ++s) out(at++) = Sigma(r, s);
  return out;
}

std::map<std::string, double> MixedModel::state_report(const ParameterState& state) const {
  const auto* cache = dynamic_cast<const StatCache*>(state.cache());
  if (!cache) return {};
  return {{"cache_max_drift", cache->max_drift},
          {"cache_audits", static_cast<double>(cache->audits)},
          {"cache_updates", static_cast<double>(cache->updates)}};
}

double exchangeable_acceptance(const MixedModel& model, const ParameterState& state,
                               const UpdateMessage& msg, bool use_message_old_value) {
  if (msg.coord.index >= static_cast<std::size_t>(model.n())) {
    throw Error("exchangeable_acceptance: " + model.coord_name(msg.coord) +
                " is not a per-user coordinate");
  }
  const auto j = static_cast<Eigen::Index>(msg.coord.index);
  const Value& current = use_message_old_value ? msg.old_value : state.at(msg.coord);
  const double log_ratio = model.log_local(state, j, msg.new_value.as_vector()) -
                           model.log_local(state, j, current.as_vector()) +
                           proposal_log_density(msg.proposal, current) -
                           proposal_log_density(msg.proposal, msg.new_value);
  if (std::isnan(log_ratio)) throw SupportError("exchangeable acceptance ratio is NaN");
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

}  // namespace asyncgibbs
