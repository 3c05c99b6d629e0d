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

#include "asyncgibbs/core/state.hpp"

#include <algorithm>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

ParameterState::ParameterState(std::vector<Value> values)
    : values_(std::move(values)), versions_(values_.size()) {}

ParameterState::ParameterState(const ParameterState& other)
    : values_(other.values_),
      versions_(other.versions_),
      cache_(other.cache_ ? other.cache_->clone() : nullptr) {}

ParameterState& ParameterState::operator=(const ParameterState& other) {
  if (this != &other) {
    values_ = other.values_;
    versions_ = other.versions_;
    cache_ = other.cache_ ? other.cache_->clone() : nullptr;
  }
  return *this;
}

const Value& ParameterState::at(CoordinateId c) const {
  if (c.index >= values_.size()) {
    throw Error("coordinate " + std::to_string(c.index) + " out of range (p = " +
                std::to_string(values_.size()) + ")");
  }
  return values_[c.index];
}

void ParameterState::set(CoordinateId c, Value v, Version version) {
  const Value& current = at(c);
  if (!(current.shape() == v.shape())) {
    throw Error("coordinate " + std::to_string(c.index) + " has shape " +
                current.shape().to_string() + ", got " + v.shape().to_string());
  }
  values_[c.index] = std::move(v);
  versions_[c.index] = version;
}

double ParameterState::max_abs() const {
  double out = 0.0;
  for (const auto& v : values_) out = std::max(out, v.max_abs());
  return out;
}

}  // namespace asyncgibbs
