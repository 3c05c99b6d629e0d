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

#include "asyncgibbs/core/model.hpp"

#include <cmath>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

std::string TargetModel::coord_name(CoordinateId c) const {
  return "c" + std::to_string(c.index);
}

double TargetModel::log_joint_ratio(const ParameterState& state, CoordinateId c,
                                    const Value& v) const {
  ParameterState moved = state;
  moved.set(c, v, moved.version(c));
  return log_joint(moved) - log_joint(state);
}

std::vector<std::string> TargetModel::monitor_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < num_coords(); ++i) {
    const CoordinateId c{i};
    const Shape s = shape(c);
    if (s.kind == ValueKind::kScalar) {
      names.push_back(coord_name(c));
    } else {
      for (Eigen::Index k = 0; k < s.size(); ++k) {
        names.push_back(coord_name(c) + "[" + std::to_string(k) + "]");
      }
    }
  }
  return names;
}

Eigen::VectorXd TargetModel::monitor(const ParameterState& state) const {
  Eigen::Index total = 0;
  for (const auto& v : state.values()) total += v.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& v : state.values()) {
    out.segment(at, v.size()) = v.flat();
    at += v.size();
  }
  return out;
}

void TargetModel::assign(ParameterState& state, CoordinateId c, Value v,
                         Version version) const {
  Value old = state.at(c);
  state.set(c, std::move(v), version);
  on_update(state, c, old);
}

ParameterState TargetModel::initial_state_with_cache() const {
  ParameterState state = initial_state();
  state.set_cache(make_cache(state));
  return state;
}

double log_joint_ratio(const TargetModel& model, const ParameterState& state,
                       CoordinateId coord, const Value& new_value) {
  const Shape expected = model.shape(coord);
  if (!(expected == new_value.shape())) {
    throw Error("coordinate " + model.coord_name(coord) + " expects " + expected.to_string() +
                ", got " + new_value.shape().to_string());
  }
  const double r = model.log_joint_ratio(state, coord, new_value);
  if (!std::isfinite(r)) {
    throw SupportError("log joint ratio for " + model.coord_name(coord) +
                       " is not finite (support violation)");
  }
  return r;
}

Draw sample_full_conditional(const TargetModel& model, const ParameterState& state,
                             CoordinateId coord, Rng& rng) {
  if (coord.index >= model.num_coords()) {
    throw Error("coordinate " + std::to_string(coord.index) + " out of range");
  }
  try {
    return model.sample_full_conditional(state, coord, rng);
  } catch (const NumericalError& e) {
    throw NumericalError("sampling " + model.coord_name(coord) + ": " + e.what());
  }
}

}  // namespace asyncgibbs
