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

#include <compare>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace asyncgibbs {

/// Index of one full-conditional block; dense in 0..p-1 for a model with p blocks.
struct CoordinateId {
  std::size_t index = 0;

  constexpr CoordinateId() = default;
  constexpr explicit CoordinateId(std::size_t i) : index(i) {}
  constexpr auto operator<=>(const CoordinateId&) const = default;
};

using WorkerId = std::size_t;

enum class ValueKind { kScalar, kVector, kMatrix };

struct Shape {
  ValueKind kind = ValueKind::kScalar;
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;

  static Shape scalar() { return {}; }
  static Shape vector(Eigen::Index n) { return {ValueKind::kVector, n, 1}; }
  static Shape matrix(Eigen::Index r, Eigen::Index c) { return {ValueKind::kMatrix, r, c}; }

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string to_string() const;
};

/// A dense real payload tagged as scalar, vector or matrix.
class Value {
 public:
  Value() : Value(scalar(0.0)) {}

  static Value scalar(double x);
  static Value vector(Eigen::VectorXd v);
  static Value matrix(Eigen::MatrixXd m);
  static Value zeros(const Shape& shape);

  ValueKind kind() const { return shape_.kind; }
  const Shape& shape() const { return shape_; }
  Eigen::Index size() const { return data_.size(); }

  double as_scalar() const;
  Eigen::Map<const Eigen::VectorXd> as_vector() const;
  const Eigen::MatrixXd& as_matrix() const { return data_; }

  /// Entries in column-major order, regardless of kind.
  Eigen::Map<const Eigen::VectorXd> flat() const {
    return {data_.data(), data_.size()};
  }

  bool all_finite() const { return data_.allFinite(); }
  double max_abs() const { return data_.size() ? data_.cwiseAbs().maxCoeff() : 0.0; }

  friend bool operator==(const Value& a, const Value& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Value(Shape shape, Eigen::MatrixXd data) : shape_(shape), data_(std::move(data)) {}

  Shape shape_;
  Eigen::MatrixXd data_;
};

}  // namespace asyncgibbs
