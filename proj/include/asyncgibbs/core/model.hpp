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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asyncgibbs/core/proposal.hpp"
#include "asyncgibbs/core/rng.hpp"
#include "asyncgibbs/core/state.hpp"
#include "asyncgibbs/core/value.hpp"

namespace asyncgibbs {

/// A draw from a full conditional together with the descriptor of the
/// distribution it came from.
struct Draw {
  Value value;
  ProposalDescriptor proposal;
};

/// Broadcast unit. Immutable once built; shared between receivers.
struct UpdateMessage {
  CoordinateId coord;
  Value new_value;
  /// Sender's value before the update.
  Value old_value;
  ProposalDescriptor proposal;
  WorkerId sender = 0;
  /// Strictly increasing per (sender, coord).
  std::uint64_t clock = 0;
  /// Data point the coordinate belongs to, for exchangeable models.
  std::optional<std::size_t> data_ref;
};

using MessagePtr = std::shared_ptr<const UpdateMessage>;

/// A posterior to sample from by Gibbs steps. Implementations are immutable
/// after construction and are read concurrently by all workers.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  /// Number of full conditionals p.
  virtual std::size_t num_coords() const = 0;
  virtual Shape shape(CoordinateId c) const = 0;
  virtual std::string coord_name(CoordinateId c) const;

  /// Coordinates sampled on every worker and never transmitted.
  virtual std::vector<CoordinateId> top_level_coords() const { return {}; }

  virtual ParameterState initial_state() const = 0;

  /// Unnormalized log joint density (up to terms constant in all coordinates).
  virtual double log_joint(const ParameterState& state) const = 0;

  /// log f(state with c <- v) - log f(state). The default evaluates
  /// log_joint twice; models override it with a local computation.
  virtual double log_joint_ratio(const ParameterState& state, CoordinateId c,
                                 const Value& v) const;

  virtual Draw sample_full_conditional(const ParameterState& state, CoordinateId c,
                                       Rng& rng) const = 0;

  /// Data point index carried by updates to c (exchangeable models).
  virtual std::optional<std::size_t> data_ref(CoordinateId) const { return std::nullopt; }

  /// Builds derived state for `state` (nullptr if the model keeps none).
  virtual std::unique_ptr<ModelCache> make_cache(const ParameterState&) const { return nullptr; }

  /// Called after state[c] changed from `old_value`. Keeps the cache current.
  virtual void on_update(ParameterState&, CoordinateId, const Value& /*old_value*/) const {}

  /// Scalar quantities recorded in traces and moment accumulators.
  virtual std::vector<std::string> monitor_names() const;
  virtual Eigen::VectorXd monitor(const ParameterState& state) const;

  /// Model-specific health counters reported in run summaries.
  virtual std::map<std::string, double> state_report(const ParameterState&) const { return {}; }

  /// Writes v into state[c] and updates the cache.
  void assign(ParameterState& state, CoordinateId c, Value v, Version version = {}) const;

  /// initial_state() with a fresh cache attached.
  ParameterState initial_state_with_cache() const;
};

/// log f(state with coord <- new_value) - log f(state). Throws SupportError if
/// the result is not finite, Error on a shape mismatch.
double log_joint_ratio(const TargetModel& model, const ParameterState& state,
                       CoordinateId coord, const Value& new_value);

/// Draws from the exact full conditional of `coord`. Errors from the model are
/// rethrown with the coordinate attached.
Draw sample_full_conditional(const TargetModel& model, const ParameterState& state,
                             CoordinateId coord, Rng& rng);

}  // namespace asyncgibbs
