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

#include "asyncgibbs/cli/plot_data.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/models/gp.hpp"
#include "json.hpp"

namespace asyncgibbs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunDir {
  std::string name;
  fs::path path;
  json summary;
};

RunDir load_run(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw Error("missing " + (dir / "summary.json").string());
  RunDir r;
  r.path = dir;
  try {
    r.summary = json::parse(in);
  } catch (const json::exception& e) {
    throw Error((dir / "summary.json").string() + ": " + e.what());
  }
  r.name = r.summary.value("name", dir.filename().string());
  return r;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// Copies a CSV with a leading run column; the header is written once.
void append_keyed(std::ofstream& out, bool& header_done, const std::string& run,
                  const fs::path& src) {
  std::ifstream in(src);
  if (!in) throw Error("missing " + src.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(src.string() + ": empty file");
  if (!header_done) {
    out << "run," << line << '\n';
    header_done = true;
  }
  while (std::getline(in, line)) {
    if (!line.empty()) out << run << ',' << line << '\n';
  }
}

bool write_gp_overlay(const RunDir& run, const fs::path& path, const std::string* key) {
  if (run.summary.value("family", "") != "gp") return false;
  const fs::path data_path = run.path / run.summary.value("data_file", "data.csv");
  if (!fs::exists(data_path)) return false;
  const GpData data = read_gp_csv(data_path);

  std::map<std::string, std::pair<double, double>> moments;
  std::ifstream in(run.path / "moments.csv");
  if (!in) throw Error("missing " + (run.path / "moments.csv").string());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string name, mean, sd;
    std::getline(ss, name, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, sd, ',');
    moments[name] = {std::stod(mean), std::stod(sd)};
  }

  const bool fresh = !fs::exists(path) || key == nullptr;
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (fresh) out << (key ? "run," : "") << "x,y,posterior_mean,posterior_sd,truth\n";
  for (Eigen::Index i = 0; i < data.x.size(); ++i) {
    const auto it = moments.find("theta[" + std::to_string(i) + "]");
    if (it == moments.end()) throw Error("moments.csv has no theta[" + std::to_string(i) + "]");
    if (key) out << *key << ',';
    out << data.x(i) << ',' << data.y(i) << ',' << it->second.first << ',' << it->second.second
        << ',' << gp_truth(data.x(i)) << '\n';
  }
  return true;
}

json check_value(const json& summary, const std::string& group, const std::string& key) {
  const auto c = summary.find("checks");
  if (c == summary.end() || !c->contains(group)) return nullptr;
  return (*c)[group].value(key, json(nullptr));
}

}  // namespace

std::vector<fs::path> emit_plot_data(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<RunDir> runs;
  const bool single = fs::exists(dir / "summary.json");
  if (single) {
    runs.push_back(load_run(dir));
  } else {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "summary.json")) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& p : subdirs) runs.push_back(load_run(p));
  }
  if (runs.empty()) throw Error("no summary.json in " + dir.string() + " or its subdirectories");

  const fs::path out_dir = dir / "plot";
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  {
    const fs::path p = out_dir / "histogram.csv";
    auto out = open_out(p);
    bool header = false;
    for (const auto& r : runs) append_keyed(out, header, r.name, r.path / "histogram.csv");
    written.push_back(p);
  }
  const bool any_traces = std::any_of(runs.begin(), runs.end(), [](const RunDir& r) {
    return fs::exists(r.path / "traces.csv");
  });
  if (any_traces) {
    const fs::path p = out_dir / "traces.csv";
    auto out = open_out(p);
    bool header = false;
    for (const auto& r : runs) {
      if (fs::exists(r.path / "traces.csv")) append_keyed(out, header, r.name, r.path / "traces.csv");
    }
    written.push_back(p);
  }
  {
    const fs::path p = out_dir / "gp_overlay.csv";
    fs::remove(p);
    bool any = false;
    for (const auto& r : runs) any |= write_gp_overlay(r, p, single ? nullptr : &r.name);
    if (any) written.push_back(p);
  }
  if (!single) {
    const fs::path p = out_dir / "panels.csv";
    auto out = open_out(p);
    out << "run,family,mode,transmit_prob,fraction_below,frobenius_error,max_abs_mean_z,diverged\n";
    auto cell = [](const json& v) {
      if (v.is_null()) return std::string();
      if (v.is_string()) return v.get<std::string>();
      return v.dump();
    };
    for (const auto& r : runs) {
      const json& s = r.summary;
      json below = nullptr;
      if (s.contains("diagnostic_a") && s["diagnostic_a"].is_object()) {
        below = s["diagnostic_a"].value("fraction_below", json(nullptr));
      }
      json tp = s.contains("network") ? s["network"].value("transmit_prob", json(nullptr)) : json();
      json diverged = s.contains("divergence") ? s["divergence"].value("diverged", json(nullptr))
                                               : json();
      out << r.name << ',' << cell(s.value("family", json())) << ','
          << cell(s.value("mode", json())) << ',' << cell(tp) << ',' << cell(below) << ','
          << cell(check_value(s, "gaussian", "frobenius_error")) << ','
          << cell(check_value(s, "gaussian", "max_abs_mean_z")) << ',' << cell(diverged) << '\n';
    }
    written.push_back(p);
  }
  return written;
}

}  // namespace asyncgibbs
