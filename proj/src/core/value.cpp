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

#include "asyncgibbs/core/value.hpp"

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {

std::string Shape::to_string() const {
  switch (kind) {
    case ValueKind::kScalar:
      return "scalar";
    case ValueKind::kVector:
      return "vector(" + std::to_string(rows) + ")";
    case ValueKind::kMatrix:
      return "matrix(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
  }
  return "?";
}

Value Value::scalar(double x) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = x;
  return Value(Shape::scalar(), std::move(m));
}

Value Value::vector(Eigen::VectorXd v) {
  const auto n = v.size();
  return Value(Shape::vector(n), Eigen::MatrixXd(std::move(v)));
}

Value Value::matrix(Eigen::MatrixXd m) {
  Shape shape = Shape::matrix(m.rows(), m.cols());
  return Value(shape, std::move(m));
}

Value Value::zeros(const Shape& shape) {
  return Value(shape, Eigen::MatrixXd::Zero(shape.rows, shape.cols));
}

double Value::as_scalar() const {
  if (shape_.kind != ValueKind::kScalar) {
    throw Error("value is " + shape_.to_string() + ", expected scalar");
  }
  return data_(0, 0);
}

Eigen::Map<const Eigen::VectorXd> Value::as_vector() const {
  if (shape_.kind == ValueKind::kMatrix) {
    throw Error("value is " + shape_.to_string() + ", expected vector");
  }
  return {data_.data(), data_.size()};
}

}  // namespace asyncgibbs
