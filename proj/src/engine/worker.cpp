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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/engine/engine.hpp"

namespace asyncgibbs {

std::string to_string(UpdateMode mode) {
  return mode == UpdateMode::kExact ? "exact" : "approximate";
}

double LatencyModel::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kConstant:
      return a;
    case Kind::kUniform:
      return a + (b - a) * rng.uniform();
    case Kind::kGeometric: {
      std::geometric_distribution<std::uint64_t> dist(a);
      return static_cast<double>(dist(rng));
    }
  }
  return a;
}

void LatencyModel::validate() const {
  switch (kind) {
    case Kind::kConstant:
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw ConfigError("network.latency", "constant latency must be finite and >= 0");
      }
      break;
    case Kind::kUniform:
      if (!(a >= 0.0) || !(b >= a) || !std::isfinite(b)) {
        throw ConfigError("network.latency", "uniform latency needs 0 <= a <= b");
      }
      break;
    case Kind::kGeometric:
      if (!(a > 0.0 && a <= 1.0)) {
        throw ConfigError("network.latency", "geometric success probability must be in (0,1]");
      }
      break;
  }
}

void NetworkConfig::validate() const {
  if (!(transmit_prob > 0.0 && transmit_prob <= 1.0)) {
    throw ConfigError("network.transmit_prob", "must be in (0, 1]");
  }
  latency.validate();
}

Counters& Counters::operator+=(const Counters& o) {
  steps += o.steps;
  messages_sent += o.messages_sent;
  delivered += o.delivered;
  dropped += o.dropped;
  processed += o.processed;
  accepted += o.accepted;
  rejected += o.rejected;
  stale += o.stale;
  alpha_evaluations += o.alpha_evaluations;
  exact_decisions += o.exact_decisions;
  exact_alpha_sum += o.exact_alpha_sum;
  inbox_peak = std::max(inbox_peak, o.inbox_peak);
  inbox_warnings += o.inbox_warnings;
  return *this;
}

double exact_acceptance_prob(const TargetModel& model, const ParameterState& state,
                             const UpdateMessage& msg) {
  const Value& current = state.at(msg.coord);
  if (current == msg.new_value) return 1.0;
  const double log_q_current = proposal_log_density(msg.proposal, current);
  const double log_q_new = proposal_log_density(msg.proposal, msg.new_value);
  if (std::isnan(log_q_current) || std::isnan(log_q_new)) {
    throw SupportError("proposal density of " + model.coord_name(msg.coord) + " is NaN");
  }
  if (log_q_current == -std::numeric_limits<double>::infinity()) return 0.0;
  if (log_q_new == -std::numeric_limits<double>::infinity()) return 1.0;
  const double log_ratio = log_joint_ratio(model, state, msg.coord, msg.new_value);
  const double log_alpha = log_ratio + log_q_current - log_q_new;
  if (std::isnan(log_alpha)) {
    throw SupportError("acceptance ratio of " + model.coord_name(msg.coord) + " is NaN");
  }
  return log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
}

Worker::Worker(const TargetModel& model, WorkerConfig config, std::size_t num_workers,
               const RunOptions& options, ParameterState initial)
    : model_(model),
      config_(std::move(config)),
      num_workers_(num_workers),
      burn_in_(options.effective_burn_in()),
      thin_(std::max<std::uint64_t>(1, options.thin)),
      trace_limit_(options.trace_limit),
      inbox_soft_limit_(options.inbox_soft_limit),
      state_(std::move(initial)),
      rng_(worker_seed(options.seed, config_.worker_id), kSamplingStream),
      reservoir_rng_(worker_seed(options.seed, config_.worker_id), kReservoirStream),
      transmitted_(model.num_coords(), false),
      send_clock_(model.num_coords(), 0),
      last_clock_(num_workers * model.num_coords(), 0) {
  candidates_ = config_.owned_coords;
  candidates_.insert(candidates_.end(), config_.local_coords.begin(), config_.local_coords.end());
  cumulative_.resize(config_.selection_probs.size());
  std::partial_sum(config_.selection_probs.begin(), config_.selection_probs.end(),
                   cumulative_.begin());
  for (auto c : config_.owned_coords) transmitted_[c.index] = true;

  const auto names = model_.monitor_names();
  diag_.mh_ratios = Reservoir<MhRecord>(options.reservoir_capacity);
  diag_.moments = OnlineMoments(static_cast<Eigen::Index>(names.size()));
  diag_.trace.names.assign(names.begin(),
                           names.begin() + std::min(names.size(), trace_limit_));
  diag_.divergence = DivergenceMonitor(options.divergence_bound);
}

CoordinateId Worker::select_coordinate() {
  if (candidates_.size() == 1) return candidates_.front();
  const double u = rng_.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = std::min<std::size_t>(it - cumulative_.begin(), candidates_.size() - 1);
  return candidates_[k];
}

std::vector<Envelope> Worker::step() {
  drain_inbox();
  ++counters_.steps;
  const CoordinateId c = select_coordinate();
  Draw draw = [&] {
    try {
      return sample_full_conditional(model_, state_, c, rng_);
    } catch (const NumericalError& e) {
      throw NumericalError("worker " + std::to_string(config_.worker_id) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("worker " + std::to_string(config_.worker_id) + ", " + model_.coord_name(c) +
                  ": " + e.what());
    }
  }();
  const std::uint64_t clock = ++send_clock_[c.index];
  const Version version{config_.worker_id, clock};
  std::vector<Envelope> out;
  if (event_log_) {
    event_log_->push_back({EventLogEntry::Kind::kStep, *virtual_clock_, config_.worker_id,
                           config_.worker_id, c, clock, *virtual_clock_});
  }
  if (transmitted_[c.index] && num_workers_ > 1) {
    auto msg = std::make_shared<const UpdateMessage>(
        UpdateMessage{c, draw.value, state_[c], std::move(draw.proposal), config_.worker_id,
                      clock, model_.data_ref(c)});
    out.reserve(num_workers_ - 1);
    for (WorkerId w = 0; w < num_workers_; ++w) {
      if (w != config_.worker_id) out.push_back({w, msg});
    }
    counters_.messages_sent += out.size();
    model_.assign(state_, c, msg->new_value, version);
  } else {
    model_.assign(state_, c, std::move(draw.value), version);
  }
  record();
  return out;
}

void Worker::record() {
  const std::uint64_t t = counters_.steps;
  if (std::isfinite(diag_.divergence.bound())) {
    diag_.divergence.observe(t, state_.max_abs());
  }
  if (t <= burn_in_ || (t - burn_in_) % thin_ != 0) return;
  const Eigen::VectorXd row = model_.monitor(state_);
  diag_.moments.add(row);
  if (!diag_.trace.names.empty()) {
    diag_.trace.append(t, row.head(static_cast<Eigen::Index>(diag_.trace.width())));
  }
}

void Worker::deliver(MessagePtr message) {
  inbox_.push_back(std::move(message));
  ++counters_.delivered;
  counters_.inbox_peak = std::max(counters_.inbox_peak, inbox_.size());
  if (inbox_.size() == inbox_soft_limit_ + 1) ++counters_.inbox_warnings;
}

std::size_t Worker::drain_inbox() {
  std::size_t n = 0;
  while (!inbox_.empty()) {
    MessagePtr msg = std::move(inbox_.front());
    inbox_.pop_front();
    process_update(*msg);
    ++n;
  }
  return n;
}

UpdateOutcome Worker::process_update(const UpdateMessage& msg) {
  const std::size_t p = model_.num_coords();
  if (msg.sender >= num_workers_ || msg.coord.index >= p) {
    throw Error("update addressed to unknown sender/coordinate");
  }
  if (!(state_.at(msg.coord).shape() == msg.new_value.shape())) {
    throw Error("worker " + std::to_string(config_.worker_id) + ": update for " +
                model_.coord_name(msg.coord) + " has shape " + msg.new_value.shape().to_string() +
                ", expected " + state_.at(msg.coord).shape().to_string());
  }
  ++counters_.processed;
  auto log_outcome = [&](UpdateOutcome outcome) {
    if (event_log_) {
      event_log_->push_back({EventLogEntry::Kind::kProcess, *virtual_clock_, config_.worker_id,
                             msg.sender, msg.coord, msg.clock, 0.0, outcome});
    }
    return outcome;
  };
  std::uint64_t& last = last_clock_[msg.sender * p + msg.coord.index];
  if (msg.clock <= last) {
    ++counters_.stale;
    return log_outcome(UpdateOutcome::kStale);
  }
  last = msg.clock;

  const bool record = rng_.bernoulli(config_.diag_sample_prob);
  bool accept = true;
  if (config_.mode == UpdateMode::kExact) {
    const double alpha = exact_acceptance_prob(model_, state_, msg);
    ++counters_.alpha_evaluations;
    ++counters_.exact_decisions;
    counters_.exact_alpha_sum += alpha;
    if (record) diag_.mh_ratios.offer({alpha, config_.worker_id, msg.coord}, reservoir_rng_);
    accept = alpha >= 1.0 || rng_.uniform() < alpha;
  } else if (record) {
    const double alpha = exact_acceptance_prob(model_, state_, msg);
    ++counters_.alpha_evaluations;
    diag_.mh_ratios.offer({alpha, config_.worker_id, msg.coord}, reservoir_rng_);
  }

  if (!accept) {
    ++counters_.rejected;
    return log_outcome(UpdateOutcome::kRejected);
  }
  model_.assign(state_, msg.coord, msg.new_value, Version{msg.sender, msg.clock});
  ++counters_.accepted;
  return log_outcome(UpdateOutcome::kAccepted);
}

std::vector<Envelope> worker_step(Worker& worker) { return worker.step(); }

UpdateOutcome process_update(Worker& worker, const UpdateMessage& msg) {
  return worker.process_update(msg);
}

void validate_workers(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                      bool allow_multi_owner) {
  if (workers.empty()) throw ConfigError("topology.workers", "need at least one worker");
  const std::size_t p = model.num_coords();
  std::set<std::size_t> top_level;
  for (auto c : model.top_level_coords()) top_level.insert(c.index);
  std::vector<std::size_t> owners(p, 0);

  for (std::size_t w = 0; w < workers.size(); ++w) {
    const auto& cfg = workers[w];
    const std::string prefix = "workers[" + std::to_string(w) + "]";
    if (cfg.worker_id != w) {
      throw ConfigError(prefix + ".worker_id", "worker ids must be 0..m-1 in order");
    }
    const std::size_t k = cfg.owned_coords.size() + cfg.local_coords.size();
    if (k == 0) throw ConfigError(prefix + ".owned_coords", "worker has nothing to sample");
    if (cfg.selection_probs.size() != k) {
      throw ConfigError(prefix + ".selection_probs",
                        "need one probability per owned and local coordinate");
    }
    double sum = 0.0;
    for (double q : cfg.selection_probs) {
      if (!(q > 0.0 && q <= 1.0)) {
        throw ConfigError(prefix + ".selection_probs", "probabilities must lie in (0, 1]");
      }
      sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError(prefix + ".selection_probs", "probabilities must sum to 1");
    }
    if (!(cfg.diag_sample_prob >= 0.0 && cfg.diag_sample_prob <= 1.0)) {
      throw ConfigError(prefix + ".diag_sample_prob", "must lie in [0, 1]");
    }
    std::set<std::size_t> seen;
    for (auto c : cfg.owned_coords) {
      if (c.index >= p) throw ConfigError(prefix + ".owned_coords", "coordinate out of range");
      if (top_level.count(c.index)) {
        throw ConfigError(prefix + ".owned_coords",
                          model.coord_name(c) + " is top-level and cannot be transmitted");
      }
      if (!seen.insert(c.index).second) {
        throw ConfigError(prefix + ".owned_coords", "duplicate coordinate");
      }
      ++owners[c.index];
    }
    std::set<std::size_t> local;
    for (auto c : cfg.local_coords) {
      if (c.index >= p) throw ConfigError(prefix + ".local_coords", "coordinate out of range");
      if (!top_level.count(c.index)) {
        throw ConfigError(prefix + ".local_coords",
                          model.coord_name(c) + " is not a top-level coordinate");
      }
      if (!local.insert(c.index).second) {
        throw ConfigError(prefix + ".local_coords", "duplicate coordinate");
      }
    }
    if (local.size() != top_level.size()) {
      throw ConfigError(prefix + ".local_coords",
                        "every top-level coordinate must be sampled locally on every worker");
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    if (top_level.count(c)) continue;
    if (owners[c] == 0) {
      throw ConfigError("topology.ownership",
                        model.coord_name(CoordinateId{c}) + " is not assigned to any worker");
    }
    if (owners[c] > 1 && !allow_multi_owner) {
      throw ConfigError("topology.ownership", model.coord_name(CoordinateId{c}) +
                                                  " has several owners (multi_owner is off)");
    }
  }
}

std::vector<WorkerConfig> partition_workers(const TargetModel& model, std::size_t num_workers,
                                            UpdateMode mode, double diag_sample_prob) {
  if (num_workers == 0) throw ConfigError("topology.workers", "need at least one worker");
  const auto top = model.top_level_coords();
  std::set<std::size_t> top_set;
  for (auto c : top) top_set.insert(c.index);
  std::vector<CoordinateId> transmitted;
  for (std::size_t c = 0; c < model.num_coords(); ++c) {
    if (!top_set.count(c)) transmitted.push_back(CoordinateId{c});
  }

  std::vector<WorkerConfig> out(num_workers);
  const std::size_t t = transmitted.size();
  for (std::size_t w = 0; w < num_workers; ++w) {
    auto& cfg = out[w];
    cfg.worker_id = w;
    cfg.mode = mode;
    cfg.diag_sample_prob = diag_sample_prob;
    if (t >= num_workers) {
      const std::size_t begin = w * t / num_workers;
      const std::size_t end = (w + 1) * t / num_workers;
      cfg.owned_coords.assign(transmitted.begin() + begin, transmitted.begin() + end);
    } else if (t > 0) {
      cfg.owned_coords.push_back(transmitted[w % t]);
    }
    cfg.local_coords = top;
    const std::size_t k = cfg.owned_coords.size() + cfg.local_coords.size();
    cfg.selection_probs.assign(k, 1.0 / static_cast<double>(k));
  }
  return out;
}

}  // namespace asyncgibbs
