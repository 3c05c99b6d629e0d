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

// asyncgibbs: run, validate and post-process asynchronous Gibbs experiments.

#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "asyncgibbs/cli/config.hpp"
#include "asyncgibbs/cli/experiment.hpp"
#include "asyncgibbs/cli/plot_data.hpp"
#include "asyncgibbs/core/error.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

int fail(const std::string& kind, const std::string& message, const std::string& field = {}) {
  json err{{"error", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << err.dump() << std::endl;
  return kind == "config" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous Gibbs sampling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment and write its results");
  run->add_option("config", config_path, "Experiment config (.ini)")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_path, "Experiment config (.ini)")->required();

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot-data", "Write tidy CSVs for plotting from run output");
  plot->add_option("dir", plot_dir, "Run directory, or a directory of runs")->required();

  CLI11_PARSE(app, argc, argv);

  using asyncgibbs::ConfigError;
  try {
    if (*run) {
      const auto config = asyncgibbs::load_experiment_config(config_path);
      const auto start = std::chrono::steady_clock::now();
      const auto outcome = asyncgibbs::run_experiment(config);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      json out{{"status", "ok"},
               {"name", config.name},
               {"output", outcome.output_dir.string()},
               {"truncated", outcome.run.truncated},
               {"seconds", seconds}};
      std::cout << out.dump() << std::endl;
    } else if (*validate) {
      const auto config = asyncgibbs::load_experiment_config(validate_path);
      asyncgibbs::validate_experiment(config);
      json out{{"status", "ok"},
               {"name", config.name},
               {"family", asyncgibbs::to_string(config.model.family)},
               {"output", asyncgibbs::resolve_output_dir(config).string()}};
      std::cout << out.dump() << std::endl;
    } else if (*plot) {
      const auto files = asyncgibbs::emit_plot_data(plot_dir);
      json out{{"status", "ok"}, {"files", json::array()}};
      for (const auto& f : files) out["files"].push_back(f.string());
      std::cout << out.dump() << std::endl;
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), e.field());
  } catch (const asyncgibbs::SupportError& e) {
    return fail("support", e.what());
  } catch (const asyncgibbs::NumericalError& e) {
    return fail("numerical", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
