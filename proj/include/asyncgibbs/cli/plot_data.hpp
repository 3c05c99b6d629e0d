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
#include <vector>

namespace asyncgibbs {

/// Writes tidy CSVs (one observation per row) under <dir>/plot.
///
/// A run directory (one holding summary.json) gets histogram.csv, traces.csv
/// when the run kept traces, and gp_overlay.csv (x, y, posterior_mean,
/// posterior_sd, truth) for GP runs. A directory of run directories gets the
/// same files merged, keyed by run name, plus panels.csv with one row per run.
/// Returns the files written; throws Error when no summary.json is found.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir);

}  // namespace asyncgibbs
