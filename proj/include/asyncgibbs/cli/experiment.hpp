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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asyncgibbs/cli/config.hpp"
#include "asyncgibbs/engine/engine.hpp"

namespace asyncgibbs {

/// Comparison of a Gaussian-target run with the analytic moments.
struct GaussianCheck {
  double frobenius_error = 0.0;  // pooled covariance
  std::vector<double> worker_frobenius_error;
  /// worker × coordinate: mean / batch-means SE.
  std::vector<std::vector<double>> mean_z;
  double max_abs_mean_z = 0.0;
};

struct GpCheck {
  double mu = 0.0;
  double sigma2 = 0.0;
  double tau2 = 0.0;
  /// Share of indices at least 3 away from a block edge whose posterior mean
  /// lies within 3 dense-oracle sd of the dense-oracle mean.
  double interior_within_3sd = 0.0;
  std::size_t interior_count = 0;
};

struct MixedCheck {
  double cache_max_drift = 0.0;
  std::uint64_t cache_audits = 0;
  /// Mean of 1 - α over recorded acceptance probabilities, if any.
  std::optional<double> rejection_probability;
};

struct ExperimentOutcome {
  ExperimentConfig config;
  std::shared_ptr<const TargetModel> model;
  RunResult run;
  std::optional<DiagnosticASummary> diagnostic_a;
  std::optional<GaussianCheck> gaussian;
  std::optional<GpCheck> gp;
  std::optional<MixedCheck> mixed;
  /// Contents of summary.json: depends only on the config, never on timing.
  std::string summary_json;
  std::filesystem::path output_dir;
};

/// Builds the model named by config.model (generating or loading data).
std::shared_ptr<const TargetModel> build_model(const ExperimentConfig& config);

/// Worker layout from the topology section.
std::vector<WorkerConfig> build_workers(const ExperimentConfig& config, const TargetModel& model);

/// Runs the experiment. With write_files, creates the output directory and
/// writes summary.json, moments.csv, histogram.csv, and optionally
/// traces.csv, mh_ratios.csv and the generated dataset.
ExperimentOutcome run_experiment(const ExperimentConfig& config, bool write_files = true);

/// Checks everything run_experiment would check without running: parses,
/// builds the model and worker layout.
void validate_experiment(const ExperimentConfig& config);

}  // namespace asyncgibbs
