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

#include "asyncgibbs/cli/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/models/gaussian.hpp"
#include "asyncgibbs/models/gp.hpp"
#include "asyncgibbs/models/mixed.hpp"
#include "json.hpp"

namespace asyncgibbs {
namespace {

using nlohmann::json;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(finite_or_null(v(i)));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

json counters_json(const Counters& c) {
  return {{"steps", c.steps},
          {"messages_sent", c.messages_sent},
          {"delivered", c.delivered},
          {"dropped", c.dropped},
          {"processed", c.processed},
          {"accepted", c.accepted},
          {"rejected", c.rejected},
          {"stale", c.stale},
          {"alpha_evaluations", c.alpha_evaluations},
          {"exact_decisions", c.exact_decisions},
          {"exact_alpha_sum", c.exact_alpha_sum},
          {"inbox_peak", c.inbox_peak},
          {"inbox_warnings", c.inbox_warnings}};
}

std::string latency_string(const LatencyModel& l) {
  std::ostringstream s;
  s << std::setprecision(17);
  switch (l.kind) {
    case LatencyModel::Kind::kConstant: s << "constant " << l.a; break;
    case LatencyModel::Kind::kUniform: s << "uniform " << l.a << ' ' << l.b; break;
    case LatencyModel::Kind::kGeometric: s << "geometric " << l.a; break;
  }
  return s.str();
}

std::string schedule_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::kPoisson: return "poisson";
    case ScheduleKind::kLockstep: return "lockstep";
    case ScheduleKind::kRoundRobin: return "round_robin";
  }
  return "unknown";
}

GaussianCheck gaussian_check(const GaussianTarget& target, const RunResult& run) {
  GaussianCheck g;
  const auto& d = run.diagnostics;
  if (d.pooled_moments.count() > 1 && d.pooled_moments.has_full_covariance()) {
    g.frobenius_error = frobenius_relative_error(d.pooled_moments.covariance(), target.covariance());
  } else {
    g.frobenius_error = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t w = 0; w < d.worker_moments.size(); ++w) {
    const auto& m = d.worker_moments[w];
    g.worker_frobenius_error.push_back(
        m.count() > 1 && m.has_full_covariance()
            ? frobenius_relative_error(m.covariance(), target.covariance())
            : std::numeric_limits<double>::quiet_NaN());
    std::vector<double> z;
    const Trace& tr = d.traces[w];
    for (std::size_t k = 0; k < tr.width(); ++k) {
      const auto col = tr.column(k);
      double value = std::numeric_limits<double>::quiet_NaN();
      if (col.size() >= 8) {
        const double se = batch_means_se(col);
        const auto idx = static_cast<Eigen::Index>(k);
        value = se > 0.0 ? (m.mean()(idx) - target.mean()(idx)) / se
                         : std::numeric_limits<double>::quiet_NaN();
      }
      z.push_back(value);
      if (std::isnan(value) || std::isnan(g.max_abs_mean_z)) {
        g.max_abs_mean_z = std::numeric_limits<double>::quiet_NaN();
      } else {
        g.max_abs_mean_z = std::max(g.max_abs_mean_z, std::abs(value));
      }
    }
    g.mean_z.push_back(std::move(z));
  }
  return g;
}

GpCheck gp_check(const GpModel& model, const RunResult& run) {
  const auto& mean = run.diagnostics.pooled_moments.mean();
  GpCheck g;
  g.mu = mean(0);
  g.sigma2 = mean(1);
  g.tau2 = mean(2);
  if (!(g.sigma2 > 0.0) || !(g.tau2 > 0.0)) return g;
  const GpConfig& cfg = model.config();
  const GpDensePosterior dense = gp_dense_posterior(cfg, model.data().y, g.mu, g.sigma2, g.tau2);
  std::size_t ok = 0;
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    const Eigen::Index off = i % cfg.block_size;
    if (off < 3 || off >= cfg.block_size - 3) continue;
    ++g.interior_count;
    if (std::abs(mean(3 + i) - dense.mean(i)) <= 3.0 * std::sqrt(dense.covariance(i, i))) ++ok;
  }
  g.interior_within_3sd =
      g.interior_count ? static_cast<double>(ok) / static_cast<double>(g.interior_count) : 0.0;
  return g;
}

MixedCheck mixed_check(const MixedModel& model, const RunResult& run) {
  MixedCheck m;
  for (const auto& s : run.final_states) {
    const auto report = model.state_report(s);
    if (auto it = report.find("cache_max_drift"); it != report.end()) {
      m.cache_max_drift = std::max(m.cache_max_drift, it->second);
    }
    if (auto it = report.find("cache_audits"); it != report.end()) {
      m.cache_audits += static_cast<std::uint64_t>(it->second);
    }
  }
  const auto& items = run.diagnostics.mh_ratios.items();
  if (!items.empty()) {
    double s = 0.0;
    for (const auto& r : items) s += 1.0 - r.alpha;
    m.rejection_probability = s / static_cast<double>(items.size());
  }
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string build_summary(const ExperimentOutcome& o, const std::string& data_file) {
  const ExperimentConfig& c = o.config;
  const RunResult& r = o.run;
  json s;
  s["name"] = c.name;
  s["family"] = to_string(c.model.family);
  s["mode"] = to_string(c.mode);
  s["transport"] = c.network.transport == Transport::kSimulated ? "simulated" : "threaded";
  s["seed"] = c.run.seed;
  s["data_seed"] = c.data_seed();
  s["steps"] = c.run.n_steps;
  s["burn_in"] = c.run.effective_burn_in();
  s["thin"] = c.run.thin;
  s["workers"] = c.topology.workers;
  s["diag_sample_prob"] = c.diag_sample_prob;
  s["network"] = {{"transmit_prob", c.network.network.transmit_prob},
                  {"latency", latency_string(c.network.network.latency)},
                  {"drop_scope", c.network.network.drop_scope == DropScope::kPerLink
                                     ? "per_link"
                                     : "per_broadcast"},
                  {"fifo", c.network.network.fifo_per_link},
                  {"schedule", schedule_string(c.network.schedule.kind)},
                  {"rate", c.network.schedule.rate}};
  if (!data_file.empty()) s["data_file"] = data_file;
  s["truncated"] = r.truncated;
  if (c.network.transport == Transport::kSimulated) s["virtual_time"] = r.virtual_time;
  s["counters"] = counters_json(r.totals);
  json per_worker = json::array();
  for (const auto& wc : r.worker_counters) per_worker.push_back(counters_json(wc));
  s["worker_counters"] = per_worker;

  const auto& d = r.diagnostics;
  s["divergence"] = {{"diverged", d.diverged},
                     {"step", d.divergence_step ? json(*d.divergence_step) : json(nullptr)},
                     {"worker", d.divergence_worker ? json(*d.divergence_worker) : json(nullptr)}};
  json moments{{"names", r.monitor_names},
               {"count", d.pooled_moments.count()},
               {"mean", vector_json(d.pooled_moments.mean())}};
  if (d.pooled_moments.count() > 1) {
    if (d.pooled_moments.has_full_covariance()) {
      moments["covariance"] = matrix_json(d.pooled_moments.covariance());
    } else {
      moments["variance"] = vector_json(d.pooled_moments.variance());
    }
  }
  json worker_means = json::array();
  for (const auto& m : d.worker_moments) worker_means.push_back(vector_json(m.mean()));
  moments["worker_means"] = worker_means;
  s["moments"] = moments;

  if (o.diagnostic_a) {
    const auto& a = *o.diagnostic_a;
    s["diagnostic_a"] = {{"threshold", a.threshold},
                         {"fraction_below", a.fraction_below},
                         {"total", a.total},
                         {"recorded", d.mh_ratios.seen()},
                         {"histogram", a.counts}};
  } else {
    s["diagnostic_a"] = nullptr;
  }

  json checks = json::object();
  if (o.gaussian) {
    const auto& g = *o.gaussian;
    json z = json::array();
    for (const auto& row : g.mean_z) {
      json jr = json::array();
      for (double v : row) jr.push_back(finite_or_null(v));
      z.push_back(jr);
    }
    json wf = json::array();
    for (double v : g.worker_frobenius_error) wf.push_back(finite_or_null(v));
    checks["gaussian"] = {{"frobenius_error", finite_or_null(g.frobenius_error)},
                          {"worker_frobenius_error", wf},
                          {"mean_z", z},
                          {"max_abs_mean_z", finite_or_null(g.max_abs_mean_z)}};
  }
  if (o.gp) {
    const auto& g = *o.gp;
    checks["gp"] = {{"mu", g.mu},
                    {"sigma2", g.sigma2},
                    {"tau2", g.tau2},
                    {"interior_within_3sd", g.interior_within_3sd},
                    {"interior_count", g.interior_count}};
  }
  if (o.mixed) {
    const auto& m = *o.mixed;
    checks["mixed"] = {{"cache_max_drift", m.cache_max_drift},
                       {"cache_audits", m.cache_audits},
                       {"rejection_probability", m.rejection_probability
                                                     ? json(*m.rejection_probability)
                                                     : json(nullptr)}};
  }
  s["checks"] = checks;
  return s.dump(2) + "\n";
}

void write_moments_csv(const std::filesystem::path& path, const RunResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "name,mean,sd\n" << std::setprecision(17);
  const auto& m = r.diagnostics.pooled_moments;
  const Eigen::VectorXd var =
      m.count() > 1 ? m.variance() : Eigen::VectorXd::Constant(m.dim(), std::nan(""));
  for (std::size_t k = 0; k < r.monitor_names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << r.monitor_names[k] << ',' << m.mean()(i) << ',' << std::sqrt(var(i)) << '\n';
  }
}

void write_histogram_csv(const std::filesystem::path& path,
                         const std::optional<DiagnosticASummary>& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "bin_lo,bin_hi,count,fraction\n" << std::setprecision(17);
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    const double lo = static_cast<double>(b) / kHistogramBins;
    const double hi = static_cast<double>(b + 1) / kHistogramBins;
    out << lo << ',' << hi << ',' << (a ? a->counts[b] : 0) << ','
        << (a ? a->bin_fraction(b) : 0.0) << '\n';
  }
}

void write_traces_csv(const std::filesystem::path& path, const RunResult& r) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "worker,step,name,value\n" << std::setprecision(17);
  for (std::size_t w = 0; w < r.diagnostics.traces.size(); ++w) {
    const Trace& t = r.diagnostics.traces[w];
    for (std::size_t row = 0; row < t.length(); ++row) {
      for (std::size_t k = 0; k < t.width(); ++k) {
        out << w << ',' << t.steps[row] << ',' << t.names[k] << ','
            << t.data[row * t.width() + k] << '\n';
      }
    }
  }
}

void write_mh_csv(const std::filesystem::path& path, const RunResult& r,
                  const TargetModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "worker,coord,alpha\n" << std::setprecision(17);
  for (const auto& m : r.diagnostics.mh_ratios.items()) {
    out << m.worker << ',' << model.coord_name(m.coord) << ',' << m.alpha << '\n';
  }
}

struct BuiltModel {
  std::shared_ptr<const TargetModel> model;
  std::function<void(const std::filesystem::path&)> write_data;
  std::string data_file;
};

BuiltModel build(const ExperimentConfig& c) {
  const auto& m = c.model;
  BuiltModel out;
  switch (m.family) {
    case ModelFamily::kJacobi:
      out.model = std::make_shared<GaussianTarget>(
          build_jacobi_target(m.gaussian.dim, m.gaussian.block));
      break;
    case ModelFamily::kExponential:
      out.model = std::make_shared<GaussianTarget>(
          build_exponential_target(m.gaussian.dim, m.gaussian.phi, m.gaussian.block));
      break;
    case ModelFamily::kEquicorrelated:
      out.model = std::make_shared<GaussianTarget>(
          build_equicorrelated_target(m.gaussian.dim, m.gaussian.correlation, m.gaussian.block));
      break;
    case ModelFamily::kGp: {
      GpData data;
      if (m.data_file) {
        data = read_gp_csv(*m.data_file);
      } else {
        data = generate_gp_data(m.gp, c.data_seed());
        out.data_file = "data.csv";
        out.write_data = [data](const std::filesystem::path& p) { write_gp_csv(p, data); };
      }
      out.model = std::make_shared<GpModel>(m.gp, std::move(data));
      break;
    }
    case ModelFamily::kMixed: {
      MixedData data;
      if (m.data_file) {
        data = read_mixed_jsonl(*m.data_file);
      } else {
        data = generate_mixed_data(m.mixed, c.data_seed()).data;
        out.data_file = "data.jsonl";
        out.write_data = [data](const std::filesystem::path& p) { write_mixed_jsonl(p, data); };
      }
      out.model = std::make_shared<MixedModel>(m.mixed, std::move(data));
      break;
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const TargetModel> build_model(const ExperimentConfig& config) {
  return build(config).model;
}

std::vector<WorkerConfig> build_workers(const ExperimentConfig& config, const TargetModel& model) {
  const auto& t = config.topology;
  std::vector<WorkerConfig> workers;
  if (t.owners.empty()) {
    workers = partition_workers(model, t.workers, config.mode, config.diag_sample_prob);
  } else {
    const auto top = model.top_level_coords();
    for (std::size_t w = 0; w < t.workers; ++w) {
      WorkerConfig wc;
      wc.worker_id = w;
      for (std::size_t c : t.owners[w]) wc.owned_coords.emplace_back(c);
      wc.local_coords = top;
      wc.mode = config.mode;
      wc.diag_sample_prob = config.diag_sample_prob;
      const std::size_t k = wc.owned_coords.size() + wc.local_coords.size();
      if (!t.selection.empty()) {
        wc.selection_probs = t.selection[w];
      } else if (k > 0) {
        wc.selection_probs.assign(k, 1.0 / static_cast<double>(k));
      }
      workers.push_back(std::move(wc));
    }
  }
  try {
    validate_workers(model, workers, t.allow_multi_owner);
  } catch (const ConfigError& e) {
    // Per-worker fields are reported against the topology section.
    if (e.field().rfind("worker", 0) == 0) throw ConfigError("topology." + e.field(), e.what());
    throw;
  }
  return workers;
}

void validate_experiment(const ExperimentConfig& config) {
  const auto model = build_model(config);
  build_workers(config, *model);
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, bool write_files) {
  ExperimentOutcome o;
  o.config = config;
  BuiltModel built = build(config);
  o.model = built.model;
  const auto workers = build_workers(config, *o.model);

  RunOptions options = config.run;
  options.allow_multi_owner = config.topology.allow_multi_owner;
  if (config.network.transport == Transport::kSimulated) {
    o.run = run_simulated(*o.model, workers, config.network.network, config.network.schedule,
                          options);
  } else {
    o.run = run_threaded(*o.model, workers, options, config.network.wall_clock_limit);
  }

  if (!o.run.diagnostics.mh_ratios.empty()) o.diagnostic_a = diagnostic_a_summary(o.run.diagnostics);
  if (const auto* g = dynamic_cast<const GaussianTarget*>(o.model.get())) {
    o.gaussian = gaussian_check(*g, o.run);
  } else if (const auto* gp = dynamic_cast<const GpModel*>(o.model.get())) {
    o.gp = gp_check(*gp, o.run);
  } else if (const auto* mixed = dynamic_cast<const MixedModel*>(o.model.get())) {
    o.mixed = mixed_check(*mixed, o.run);
  }
  o.summary_json = build_summary(o, built.data_file);

  if (write_files) {
    o.output_dir = resolve_output_dir(config);
    std::error_code ec;
    std::filesystem::create_directories(o.output_dir, ec);
    if (ec || !std::filesystem::is_directory(o.output_dir)) {
      throw ConfigError("output.directory",
                        "cannot create " + o.output_dir.string() + ": " + ec.message());
    }
    write_text(o.output_dir / "summary.json", o.summary_json);
    write_moments_csv(o.output_dir / "moments.csv", o.run);
    write_histogram_csv(o.output_dir / "histogram.csv", o.diagnostic_a);
    if (config.output.traces) write_traces_csv(o.output_dir / "traces.csv", o.run);
    if (config.output.mh_ratios) write_mh_csv(o.output_dir / "mh_ratios.csv", o.run, *o.model);
    if (built.write_data) built.write_data(o.output_dir / built.data_file);
  }
  return o;
}

}  // namespace asyncgibbs
