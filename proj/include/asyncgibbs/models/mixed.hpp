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
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asyncgibbs/core/model.hpp"
#include "asyncgibbs/core/proposal.hpp"

namespace asyncgibbs {

struct MixedConfig {
  Eigen::Index n = 1000;
  Eigen::Index d = 3;
  Eigen::Index T = 13;
  Eigen::Index p = 1;
  /// μ ~ N(0, κ_μ I), γ ~ N(0, κ_γ I), ν ~ IG(ε/2, ε/2), Σ ~ IW(d+1, I).
  double kappa_mu = 1.0;
  double kappa_gamma = 1.0;
  double epsilon = 10.0;
  /// Cache updates between recompute-from-scratch audits.
  std::uint64_t audit_interval = 10000;

  Eigen::Index q() const { return T - p; }
  void validate() const;
};

/// y_i = F_i β_i + W_i γ + ε_i, ε_i ~ N(0, ν I), one record per user.
struct MixedData {
  Eigen::Index d = 0;
  Eigen::Index q = 0;
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::MatrixXd> F;  // q × d
  std::vector<Eigen::MatrixXd> W;  // q × q

  Eigen::Index n() const { return static_cast<Eigen::Index>(y.size()); }
};

struct MixedTruth {
  std::vector<Eigen::VectorXd> beta;
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd gamma;
  double nu = 1.0;
};

struct MixedDataset {
  MixedData data;
  MixedTruth truth;
};

/// Standard normal F_i and W_i, parameters drawn from their priors.
MixedDataset generate_mixed_data(const MixedConfig& config, std::uint64_t seed);

/// One JSON object per line: a header {"d","q","n"}, then {"i","y","F","W"}
/// per user with matrices as arrays of rows.
void write_mixed_jsonl(const std::filesystem::path& path, const MixedData& data);
MixedData read_mixed_jsonl(const std::filesystem::path& path);

/// Running sums over users that the top-level conditionals read.
struct StatCache : ModelCache {
  Eigen::VectorXd beta_sum;  // Σ β_i
  Eigen::MatrixXd S_outer;   // Σ β_i β_iᵀ
  Eigen::VectorXd g;         // Σ W_iᵀ (y_i - F_i β_i)
  double resid_sq = 0.0;     // Σ ‖y_i - F_i β_i‖²

  std::uint64_t updates = 0;
  std::uint64_t audits = 0;
  double max_drift = 0.0;

  std::unique_ptr<ModelCache> clone() const override {
    return std::make_unique<StatCache>(*this);
  }
};

/// Hierarchical mixed-effects regression. Coordinates: β_0..β_{n-1}
/// (transmitted, data_ref = i), then μ, Σ, γ, ν (top-level).
class MixedModel : public TargetModel {
 public:
  MixedModel(MixedConfig config, MixedData data);

  const MixedConfig& config() const { return config_; }
  const MixedData& data() const { return data_; }
  Eigen::Index n() const { return data_.n(); }

  CoordinateId beta_coord(Eigen::Index i) const { return CoordinateId{static_cast<std::size_t>(i)}; }
  CoordinateId mu_coord() const { return CoordinateId{static_cast<std::size_t>(n())}; }
  CoordinateId sigma_coord() const { return CoordinateId{mu_coord().index + 1}; }
  CoordinateId gamma_coord() const { return CoordinateId{mu_coord().index + 2}; }
  CoordinateId nu_coord() const { return CoordinateId{mu_coord().index + 3}; }

  StatCache compute_cache(const ParameterState& state) const;
  /// Residual sum Σ ‖y_i - F_i β_i - W_i γ‖² read from the cache.
  double cached_l(const StatCache& cache, const Eigen::VectorXd& gamma) const;
  /// Σ (β_i - μ)(β_i - μ)ᵀ read from the cache.
  Eigen::MatrixXd cached_S(const StatCache& cache, const Eigen::VectorXd& mu) const;

  /// Applies the change of β_i from old to new to the running sums.
  void cache_update(StatCache& cache, Eigen::Index i, const Eigen::VectorXd& beta_old,
                    const Eigen::VectorXd& beta_new) const;
  /// Recomputes from scratch, records the relative drift, and replaces the cache.
  double audit(ParameterState& state) const;

  GaussianVector beta_conditional(const ParameterState& state, Eigen::Index i) const;
  GaussianVector mu_conditional(const ParameterState& state) const;
  InverseWishart sigma_conditional(const ParameterState& state) const;
  GaussianVector gamma_conditional(const ParameterState& state) const;
  InverseGamma nu_conditional(const ParameterState& state) const;

  /// log f(y_i | β, γ, ν) + log N(β | μ, Σ): every term of the joint that
  /// involves β_i.
  double log_local(const ParameterState& state, Eigen::Index i, const Eigen::VectorXd& beta) const;

  ParameterState make_state(const std::vector<Eigen::VectorXd>& beta, Eigen::VectorXd mu,
                            Eigen::MatrixXd Sigma, Eigen::VectorXd gamma, double nu) const;

  std::size_t num_coords() const override { return static_cast<std::size_t>(n()) + 4; }
  Shape shape(CoordinateId c) const override;
  std::string coord_name(CoordinateId c) const override;
  std::vector<CoordinateId> top_level_coords() const override;
  ParameterState initial_state() const override;
  double log_joint(const ParameterState& state) const override;
  double log_joint_ratio(const ParameterState& state, CoordinateId c,
                         const Value& v) const override;
  Draw sample_full_conditional(const ParameterState& state, CoordinateId c,
                               Rng& rng) const override;
  std::optional<std::size_t> data_ref(CoordinateId c) const override;
  std::unique_ptr<ModelCache> make_cache(const ParameterState& state) const override;
  void on_update(ParameterState& state, CoordinateId c, const Value& old_value) const override;
  /// μ, γ, ν and the lower triangle of Σ.
  std::vector<std::string> monitor_names() const override;
  Eigen::VectorXd monitor(const ParameterState& state) const override;
  std::map<std::string, double> state_report(const ParameterState& state) const override;

 private:
  const StatCache& cache_of(const ParameterState& state) const;

  MixedConfig config_;
  MixedData data_;
  std::vector<Eigen::MatrixXd> FtF_;
  std::vector<Eigen::MatrixXd> WtF_;
  std::vector<Eigen::VectorXd> Fty_;
  std::vector<Eigen::VectorXd> Wty_;
  std::vector<double> yty_;
  Eigen::MatrixXd WtW_sum_;
  Eigen::VectorXd Wty_sum_;
};

/// MH acceptance probability of a β_j update using data point j only: the
/// terms of the joint for every other user cancel. β_j is the receiver's
/// current value unless use_message_old_value is set.
double exchangeable_acceptance(const MixedModel& model, const ParameterState& state,
                               const UpdateMessage& msg, bool use_message_old_value = false);

}  // namespace asyncgibbs
