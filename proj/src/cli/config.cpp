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

#include "asyncgibbs/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "asyncgibbs/core/error.hpp"

namespace asyncgibbs {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kGaussianKeys{"family", "dim", "phi", "correlation", "block",
                                          "data_seed", "data_file"};
const std::set<std::string> kGpKeys{"family",  "n",           "rho",         "phi",
                                    "block_size", "band_width", "a_mu",      "b_mu",
                                    "a_sigma", "b_sigma",     "a_tau",       "b_tau",
                                    "noise_sd", "init_mu",    "init_sigma2", "init_tau2",
                                    "init_theta", "data_seed", "data_file"};
const std::set<std::string> kMixedKeys{"family", "n", "d", "T", "p", "kappa_mu", "kappa_gamma",
                                       "epsilon", "audit_interval", "data_seed", "data_file"};
const std::set<std::string> kTopologyKeys{"workers", "owners", "selection", "allow_multi_owner"};
const std::set<std::string> kNetworkKeys{"transport", "transmit_prob", "latency",
                                         "drop_scope", "fifo", "schedule",
                                         "rate", "wall_clock_limit_s"};
const std::set<std::string> kRunKeys{"mode",          "steps",           "seed",
                                     "burn_in",       "thin",            "diag_sample_prob",
                                     "reservoir_capacity", "divergence_bound",
                                     "stop_on_divergence", "trace_limit", "inbox_soft_limit"};
const std::set<std::string> kOutputKeys{"directory", "traces", "mh_ratios"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::string raw(const std::string& key) const {
    return trim(tree_->get_child(key).get_value<std::string>());
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!has(key)) return fallback;
    return parse<T>(key, raw(key));
  }

  template <typename T>
  T parse(const std::string& key, const std::string& text) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw ConfigError(field(key), "expected true or false, got '" + text + "'");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else {
      if constexpr (std::is_unsigned_v<T>) {
        if (!text.empty() && text[0] == '-') {
          throw ConfigError(field(key), "must be non-negative, got '" + text + "'");
        }
      }
      try {
        return boost::lexical_cast<T>(text);
      } catch (const boost::bad_lexical_cast&) {
        throw ConfigError(field(key), "cannot parse '" + text + "'");
      }
    }
  }

  void reject_unknown(const std::set<std::string>& allowed, const std::string& context) const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!allowed.count(key)) {
        throw ConfigError(field(key), "unknown key" + (context.empty() ? "" : " for " + context));
      }
    }
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
};

template <typename T>
std::vector<std::vector<T>> parse_groups(const Section& s, const std::string& key) {
  std::vector<std::vector<T>> groups;
  std::stringstream all(s.raw(key));
  std::string group;
  while (std::getline(all, group, '|')) {
    std::istringstream items(group);
    std::vector<T> row;
    std::string tok;
    while (items >> tok) row.push_back(s.parse<T>(key, tok));
    groups.push_back(std::move(row));
  }
  return groups;
}

LatencyModel parse_latency(const Section& s) {
  std::istringstream in(s.raw("latency"));
  std::string kind;
  in >> kind;
  std::vector<double> args;
  std::string tok;
  while (in >> tok) args.push_back(s.parse<double>("latency", tok));
  auto need = [&](std::size_t k) {
    if (args.size() != k) {
      throw ConfigError(s.field("latency"),
                        kind + " takes " + std::to_string(k) + " argument(s)");
    }
  };
  if (kind == "constant") {
    need(1);
    return LatencyModel::constant(args[0]);
  }
  if (kind == "uniform") {
    need(2);
    return LatencyModel::uniform(args[0], args[1]);
  }
  if (kind == "geometric") {
    need(1);
    return LatencyModel::geometric(args[0]);
  }
  throw ConfigError(s.field("latency"), "expected constant, uniform or geometric, got '" + kind + "'");
}

template <typename F>
void rethrow_with_section(const std::string& section, F&& body) {
  try {
    body();
  } catch (const ConfigError& e) {
    if (e.field().find('.') != std::string::npos) throw;
    throw ConfigError(section + "." + e.field(), e.what());
  }
}

void parse_model(const Section& s, ModelSection& m) {
  if (!s.has("family")) throw ConfigError("model.family", "missing");
  const std::string family = s.raw("family");
  if (family == "jacobi") {
    m.family = ModelFamily::kJacobi;
  } else if (family == "exponential") {
    m.family = ModelFamily::kExponential;
  } else if (family == "equicorrelated") {
    m.family = ModelFamily::kEquicorrelated;
  } else if (family == "gp") {
    m.family = ModelFamily::kGp;
  } else if (family == "mixed") {
    m.family = ModelFamily::kMixed;
  } else {
    throw ConfigError("model.family", "unknown model family '" + family +
                                          "' (expected jacobi, exponential, equicorrelated, gp "
                                          "or mixed)");
  }
  if (s.has("data_seed")) m.data_seed = s.get<std::uint64_t>("data_seed", 0);
  if (s.has("data_file")) m.data_file = s.raw("data_file");

  switch (m.family) {
    case ModelFamily::kJacobi:
    case ModelFamily::kExponential:
    case ModelFamily::kEquicorrelated: {
      s.reject_unknown(kGaussianKeys, family);
      if (m.data_file) throw ConfigError("model.data_file", "not used by Gaussian targets");
      auto& g = m.gaussian;
      g.dim = s.get<Eigen::Index>("dim", g.dim);
      g.phi = s.get<double>("phi", g.phi);
      g.correlation = s.get<double>("correlation", g.correlation);
      g.block = s.get<Eigen::Index>("block", g.block);
      if (g.dim < 1) throw ConfigError("model.dim", "must be positive");
      if (g.block < 1 || g.dim % g.block != 0) throw ConfigError("model.block", "must divide dim");
      if (!(g.phi > 0.0)) throw ConfigError("model.phi", "must be positive");
      if (!(g.correlation > -1.0 / static_cast<double>(std::max<Eigen::Index>(g.dim - 1, 1))) ||
          !(g.correlation < 1.0)) {
        throw ConfigError("model.correlation", "must lie in (-1/(dim-1), 1)");
      }
      break;
    }
    case ModelFamily::kGp: {
      s.reject_unknown(kGpKeys, family);
      auto& g = m.gp;
      g.n = s.get<Eigen::Index>("n", g.n);
      g.rho = s.get<double>("rho", g.rho);
      g.phi = s.get<double>("phi", g.phi);
      g.block_size = s.get<Eigen::Index>("block_size", g.block_size);
      g.band_width = s.get<Eigen::Index>("band_width", g.band_width);
      g.a_mu = s.get<double>("a_mu", g.a_mu);
      g.b_mu = s.get<double>("b_mu", g.b_mu);
      g.a_sigma = s.get<double>("a_sigma", g.a_sigma);
      g.b_sigma = s.get<double>("b_sigma", g.b_sigma);
      g.a_tau = s.get<double>("a_tau", g.a_tau);
      g.b_tau = s.get<double>("b_tau", g.b_tau);
      g.noise_sd = s.get<double>("noise_sd", g.noise_sd);
      g.init_mu = s.get<double>("init_mu", g.init_mu);
      g.init_sigma2 = s.get<double>("init_sigma2", g.init_sigma2);
      g.init_tau2 = s.get<double>("init_tau2", g.init_tau2);
      g.init_theta = s.get<double>("init_theta", g.init_theta);
      g.validate();
      break;
    }
    case ModelFamily::kMixed: {
      s.reject_unknown(kMixedKeys, family);
      auto& x = m.mixed;
      x.n = s.get<Eigen::Index>("n", x.n);
      x.d = s.get<Eigen::Index>("d", x.d);
      x.T = s.get<Eigen::Index>("T", x.T);
      x.p = s.get<Eigen::Index>("p", x.p);
      x.kappa_mu = s.get<double>("kappa_mu", x.kappa_mu);
      x.kappa_gamma = s.get<double>("kappa_gamma", x.kappa_gamma);
      x.epsilon = s.get<double>("epsilon", x.epsilon);
      x.audit_interval = s.get<std::uint64_t>("audit_interval", x.audit_interval);
      if (x.n < 1) throw ConfigError("model.n", "must be at least 1");
      x.validate();
      break;
    }
  }
}

void parse_topology(const Section& s, TopologySection& t) {
  s.reject_unknown(kTopologyKeys, "");
  t.workers = s.get<std::size_t>("workers", t.workers);
  if (t.workers < 1) throw ConfigError("topology.workers", "need at least one worker");
  t.allow_multi_owner = s.get<bool>("allow_multi_owner", t.allow_multi_owner);
  if (s.has("owners")) {
    t.owners = parse_groups<std::size_t>(s, "owners");
    if (t.owners.size() != t.workers) {
      throw ConfigError("topology.owners", "expected " + std::to_string(t.workers) +
                                               " '|'-separated groups, got " +
                                               std::to_string(t.owners.size()));
    }
  }
  if (s.has("selection")) {
    if (!s.has("owners")) throw ConfigError("topology.selection", "requires topology.owners");
    t.selection = parse_groups<double>(s, "selection");
    if (t.selection.size() != t.workers) {
      throw ConfigError("topology.selection", "expected one group per worker");
    }
  }
}

void parse_network(const Section& s, NetworkSection& n) {
  s.reject_unknown(kNetworkKeys, "");
  const std::string transport = s.get<std::string>("transport", "simulated");
  if (transport == "simulated") {
    n.transport = Transport::kSimulated;
  } else if (transport == "threaded") {
    n.transport = Transport::kThreaded;
  } else {
    throw ConfigError("network.transport", "expected simulated or threaded, got '" + transport + "'");
  }
  n.network.transmit_prob = s.get<double>("transmit_prob", n.network.transmit_prob);
  if (s.has("latency")) n.network.latency = parse_latency(s);
  const std::string scope = s.get<std::string>("drop_scope", "per_link");
  if (scope == "per_link") {
    n.network.drop_scope = DropScope::kPerLink;
  } else if (scope == "per_broadcast") {
    n.network.drop_scope = DropScope::kPerBroadcast;
  } else {
    throw ConfigError("network.drop_scope", "expected per_link or per_broadcast, got '" + scope + "'");
  }
  n.network.fifo_per_link = s.get<bool>("fifo", n.network.fifo_per_link);
  const std::string schedule = s.get<std::string>("schedule", "poisson");
  if (schedule == "poisson") {
    n.schedule.kind = ScheduleKind::kPoisson;
  } else if (schedule == "lockstep") {
    n.schedule.kind = ScheduleKind::kLockstep;
  } else if (schedule == "round_robin") {
    n.schedule.kind = ScheduleKind::kRoundRobin;
  } else {
    throw ConfigError("network.schedule",
                      "expected poisson, lockstep or round_robin, got '" + schedule + "'");
  }
  n.schedule.rate = s.get<double>("rate", n.schedule.rate);
  if (!(n.schedule.rate > 0.0)) throw ConfigError("network.rate", "must be positive");
  const double limit = s.get<double>("wall_clock_limit_s", 600.0);
  if (!(limit > 0.0)) throw ConfigError("network.wall_clock_limit_s", "must be positive");
  n.wall_clock_limit = std::chrono::milliseconds(static_cast<std::int64_t>(limit * 1000.0));
  rethrow_with_section("network", [&] { n.network.validate(); });
  if (n.transport == Transport::kThreaded &&
      (n.network.transmit_prob < 1.0 || s.has("latency") || s.has("schedule"))) {
    throw ConfigError("network.transport",
                      "threaded transport never drops and has no simulated latency or schedule");
  }
}

void parse_run(const Section& s, ExperimentConfig& c) {
  s.reject_unknown(kRunKeys, "");
  if (!s.has("seed")) throw ConfigError("run.seed", "missing (all randomness derives from it)");
  const std::string mode = s.get<std::string>("mode", "approximate");
  if (mode == "exact") {
    c.mode = UpdateMode::kExact;
  } else if (mode == "approximate") {
    c.mode = UpdateMode::kApproximate;
  } else {
    throw ConfigError("run.mode", "expected exact or approximate, got '" + mode + "'");
  }
  RunOptions& r = c.run;
  r.seed = s.get<std::uint64_t>("seed", 0);
  r.n_steps = s.get<std::uint64_t>("steps", r.n_steps);
  if (r.n_steps < 1) throw ConfigError("run.steps", "must be positive");
  if (s.has("burn_in")) r.burn_in = s.get<std::uint64_t>("burn_in", 0);
  if (r.burn_in && *r.burn_in >= r.n_steps) {
    throw ConfigError("run.burn_in", "must be smaller than run.steps");
  }
  r.thin = s.get<std::uint64_t>("thin", r.thin);
  if (r.thin < 1) throw ConfigError("run.thin", "must be at least 1");
  c.diag_sample_prob = s.get<double>("diag_sample_prob", c.diag_sample_prob);
  if (!(c.diag_sample_prob >= 0.0 && c.diag_sample_prob <= 1.0)) {
    throw ConfigError("run.diag_sample_prob", "must lie in [0, 1]");
  }
  r.reservoir_capacity = s.get<std::size_t>("reservoir_capacity", r.reservoir_capacity);
  if (r.reservoir_capacity < 1) throw ConfigError("run.reservoir_capacity", "must be positive");
  r.divergence_bound = s.get<double>("divergence_bound", r.divergence_bound);
  if (!(r.divergence_bound > 0.0)) throw ConfigError("run.divergence_bound", "must be positive");
  r.stop_on_divergence = s.get<bool>("stop_on_divergence", r.stop_on_divergence);
  r.trace_limit = s.get<std::size_t>("trace_limit", r.trace_limit);
  r.inbox_soft_limit = s.get<std::size_t>("inbox_soft_limit", r.inbox_soft_limit);
}

void parse_output(const Section& s, OutputSection& o, const std::string& name) {
  s.reject_unknown(kOutputKeys, "");
  o.directory = s.get<std::string>("directory", name);
  if (o.directory.empty()) throw ConfigError("output.directory", "must not be empty");
  o.traces = s.get<bool>("traces", o.traces);
  o.mh_ratios = s.get<bool>("mh_ratios", o.mh_ratios);
}

// "section.key" for the key on a 1-based line, "section" for a header line.
std::string field_at_line(const std::string& text, unsigned long line) {
  std::istringstream in(text);
  std::string current, section;
  for (unsigned long n = 1; n <= line && std::getline(in, current); ++n) {
    boost::algorithm::trim(current);
    if (current.size() > 1 && current.front() == '[' && current.back() == ']') {
      section = current.substr(1, current.size() - 2);
      boost::algorithm::trim(section);
    }
  }
  const auto eq = current.find('=');
  if (section.empty()) return "config";
  if (eq == std::string::npos) return section;
  std::string key = current.substr(0, eq);
  boost::algorithm::trim(key);
  return section + "." + key;
}

}  // namespace

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kJacobi: return "jacobi";
    case ModelFamily::kExponential: return "exponential";
    case ModelFamily::kEquicorrelated: return "equicorrelated";
    case ModelFamily::kGp: return "gp";
    case ModelFamily::kMixed: return "mixed";
  }
  return "unknown";
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& name) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(field_at_line(text, e.line()),
                      "line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::set<std::string> kSections{"model", "topology", "network", "run", "output"};
  for (const auto& [key, child] : tree) {
    if (child.empty() && !child.data().empty()) {
      throw ConfigError(key, "key outside of any section");
    }
    if (!kSections.count(key)) throw ConfigError(key, "unknown section");
  }
  auto section = [&](const std::string& s) {
    const auto it = tree.find(s);
    return Section(s, it == tree.not_found() ? nullptr : &it->second);
  };
  if (!section("model").has("family")) throw ConfigError("model.family", "missing");
  if (!section("run").has("seed")) throw ConfigError("run.seed", "missing (all randomness derives from it)");

  ExperimentConfig c;
  c.name = name;
  rethrow_with_section("model", [&] { parse_model(section("model"), c.model); });
  parse_topology(section("topology"), c.topology);
  parse_network(section("network"), c.network);
  parse_run(section("run"), c);
  parse_output(section("output"), c.output, name);
  if (c.network.transport == Transport::kThreaded && c.run.record_events) {
    throw ConfigError("network.transport", "event logs need the simulated transport");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig c = parse_experiment_config(buf.str(), path.stem().string());
  c.source = path;
  if (c.model.data_file && c.model.data_file->is_relative()) {
    c.model.data_file = path.parent_path() / *c.model.data_file;
  }
  return c;
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("ASYNCGIBBS_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (config.output.directory.is_absolute()) return config.output.directory;
  return output_root() / config.output.directory;
}

}  // namespace asyncgibbs
