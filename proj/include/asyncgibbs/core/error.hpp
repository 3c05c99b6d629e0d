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

#include <stdexcept>
#include <string>

namespace asyncgibbs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A density was evaluated outside its support or came out non-finite.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// A conditional or proposal could not be formed (e.g. a matrix that should
/// be positive definite is not).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid run or model configuration. `field` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace asyncgibbs
