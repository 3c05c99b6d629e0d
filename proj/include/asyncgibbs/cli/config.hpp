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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asyncgibbs/engine/engine.hpp"
#include "asyncgibbs/models/gp.hpp"
#include "asyncgibbs/models/mixed.hpp"

namespace asyncgibbs {

enum class ModelFamily { kJacobi, kExponential, kEquicorrelated, kGp, kMixed };
enum class Transport { kSimulated, kThreaded };

std::string to_string(ModelFamily family);

struct GaussianModelConfig {
  Eigen::Index dim = 8;
  double phi = 0.5;          // exponential
  double correlation = 0.5;  // equicorrelated
  Eigen::Index block = 1;
};

struct ModelSection {
  ModelFamily family = ModelFamily::kExponential;
  GaussianModelConfig gaussian;
  GpConfig gp;
  MixedConfig mixed;
  /// Seed for synthetic data; defaults to the run seed.
  std::optional<std::uint64_t> data_seed;
  /// Existing dataset to load instead of generating one (relative to the config file).
  std::optional<std::filesystem::path> data_file;
};

struct TopologySection {
  std::size_t workers = 1;
  /// Explicit owned coordinates per worker; empty means contiguous partition.
  std::vector<std::vector<std::size_t>> owners;
  /// Explicit selection probabilities per worker (owned then top-level).
  std::vector<std::vector<double>> selection;
  bool allow_multi_owner = false;
};

struct NetworkSection {
  Transport transport = Transport::kSimulated;
  NetworkConfig network;
  Schedule schedule;
  /// Threaded transport only.
  std::chrono::milliseconds wall_clock_limit{600000};
};

struct OutputSection {
  /// Relative paths resolve against the output root.
  std::filesystem::path directory;
  bool traces = true;
  bool mh_ratios = true;
};

/// A parsed, validated experiment description. See docs/config.md for the grammar.
struct ExperimentConfig {
  std::string name;
  ModelSection model;
  TopologySection topology;
  NetworkSection network;
  UpdateMode mode = UpdateMode::kApproximate;
  RunOptions run;
  double diag_sample_prob = 0.0;
  OutputSection output;
  std::filesystem::path source;

  std::uint64_t data_seed() const { return model.data_seed.value_or(run.seed); }
};

/// Parses INI text. Unknown sections or keys, malformed values and failed
/// range checks throw ConfigError naming "section.key".
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& name = "run");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// ASYNCGIBBS_OUTPUT_ROOT if set, else ./runs.
std::filesystem::path output_root();
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

}  // namespace asyncgibbs
