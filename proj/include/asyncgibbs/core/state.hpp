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

#include <cstdint>
#include <memory>
#include <vector>

#include "asyncgibbs/core/value.hpp"

namespace asyncgibbs {

/// Who last wrote a coordinate, and that writer's per-coordinate clock.
struct Version {
  WorkerId origin = 0;
  std::uint64_t clock = 0;

  bool operator==(const Version&) const = default;
};

/// Model-specific derived data kept alongside a worker's state (e.g. running
/// sufficient statistics). Deep-copied with the state.
class ModelCache {
 public:
  virtual ~ModelCache() = default;
  virtual std::unique_ptr<ModelCache> clone() const = 0;
};

/// Everything one worker currently believes about the parameter vector.
/// Confined to a single worker; copies are deep.
class ParameterState {
 public:
  ParameterState() = default;
  explicit ParameterState(std::vector<Value> values);

  ParameterState(const ParameterState& other);
  ParameterState& operator=(const ParameterState& other);
  ParameterState(ParameterState&&) noexcept = default;
  ParameterState& operator=(ParameterState&&) noexcept = default;

  std::size_t size() const { return values_.size(); }
  const Value& operator[](CoordinateId c) const { return values_[c.index]; }
  const Value& at(CoordinateId c) const;
  const Version& version(CoordinateId c) const { return versions_[c.index]; }
  const std::vector<Value>& values() const { return values_; }

  /// Raw write; does not touch the cache. Use TargetModel::assign to keep a
  /// model cache consistent.
  void set(CoordinateId c, Value v, Version version = {});

  ModelCache* cache() { return cache_.get(); }
  const ModelCache* cache() const { return cache_.get(); }
  void set_cache(std::unique_ptr<ModelCache> cache) { cache_ = std::move(cache); }

  /// Largest |entry| over all coordinates.
  double max_abs() const;

 private:
  std::vector<Value> values_;
  std::vector<Version> versions_;
  std::unique_ptr<ModelCache> cache_;
};

}  // namespace asyncgibbs
