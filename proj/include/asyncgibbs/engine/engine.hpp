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
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "asyncgibbs/core/model.hpp"
#include "asyncgibbs/diagnostics/diagnostics.hpp"

namespace asyncgibbs {

enum class UpdateMode { kExact, kApproximate };
enum class UpdateOutcome { kAccepted, kRejected, kStale };

std::string to_string(UpdateMode mode);

struct WorkerConfig {
  WorkerId worker_id = 0;
  /// Sampled here and broadcast to every other worker.
  std::vector<CoordinateId> owned_coords;
  /// Sampled on every worker, never transmitted (top-level variables).
  std::vector<CoordinateId> local_coords;
  /// One entry per owned coordinate, then one per local coordinate.
  std::vector<double> selection_probs;
  UpdateMode mode = UpdateMode::kApproximate;
  /// Probability of computing and recording the MH ratio of a received update.
  double diag_sample_prob = 0.0;
};

/// Message latency in units of virtual time.
struct LatencyModel {
  enum class Kind { kConstant, kUniform, kGeometric };
  Kind kind = Kind::kConstant;
  double a = 0.0;  // constant value, uniform lower bound, or geometric success prob
  double b = 0.0;  // uniform upper bound

  static LatencyModel constant(double d) { return {Kind::kConstant, d, 0.0}; }
  static LatencyModel uniform(double lo, double hi) { return {Kind::kUniform, lo, hi}; }
  /// Number of failures before the first success, success probability p.
  static LatencyModel geometric(double p) { return {Kind::kGeometric, p, 0.0}; }

  double sample(Rng& rng) const;
  void validate() const;
};

enum class DropScope {
  /// One coin per (message, receiver).
  kPerLink,
  /// One coin per broadcast: every receiver gets it, or none does.
  kPerBroadcast,
};

struct NetworkConfig {
  /// Probability that a broadcast reaches a receiver.
  double transmit_prob = 1.0;
  LatencyModel latency;
  bool fifo_per_link = true;
  DropScope drop_scope = DropScope::kPerLink;

  void validate() const;
};

enum class ScheduleKind {
  /// Each worker steps at i.i.d. exponential intervals.
  kPoisson,
  /// Every worker steps at t = 1, 2, ...
  kLockstep,
  /// Workers take turns: worker w steps at t = k*m + w + 1.
  kRoundRobin,
};

struct Schedule {
  ScheduleKind kind = ScheduleKind::kPoisson;
  double rate = 1.0;
};

struct RunOptions {
  std::uint64_t seed = 0;
  /// Steps per worker.
  std::uint64_t n_steps = 1000;
  /// Defaults to 10% of n_steps.
  std::optional<std::uint64_t> burn_in;
  std::uint64_t thin = 1;
  std::size_t reservoir_capacity = 10000;
  double divergence_bound = std::numeric_limits<double>::infinity();
  /// End the run as soon as any worker's divergence monitor flags.
  bool stop_on_divergence = true;
  /// A warning counter increments whenever an inbox grows past this size.
  std::size_t inbox_soft_limit = 100000;
  /// Let several workers own (and broadcast) the same coordinate.
  bool allow_multi_owner = false;
  /// Monitored quantities beyond this count are kept in moments but not traces.
  std::size_t trace_limit = 64;
  bool record_events = false;

  std::uint64_t effective_burn_in() const { return burn_in.value_or(n_steps / 10); }
};

struct Counters {
  std::uint64_t steps = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t processed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t stale = 0;
  std::uint64_t alpha_evaluations = 0;
  /// Exact-mode decisions and the sum of their acceptance probabilities.
  std::uint64_t exact_decisions = 0;
  double exact_alpha_sum = 0.0;
  std::size_t inbox_peak = 0;
  std::uint64_t inbox_warnings = 0;

  Counters& operator+=(const Counters& other);
};

struct LinkCounters {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

struct EventLogEntry {
  enum class Kind { kStep, kSend, kDrop, kDeliver, kProcess };
  Kind kind = Kind::kStep;
  double time = 0.0;
  WorkerId worker = 0;  // stepping worker, or receiver
  WorkerId sender = 0;
  CoordinateId coord;
  std::uint64_t clock = 0;
  double send_time = 0.0;
  UpdateOutcome outcome = UpdateOutcome::kAccepted;
};

struct RunResult {
  std::vector<std::string> monitor_names;
  std::vector<ParameterState> final_states;
  DiagnosticsRecord diagnostics;
  std::vector<Counters> worker_counters;
  Counters totals;
  /// links[sender][receiver]
  std::vector<std::vector<LinkCounters>> links;
  std::vector<EventLogEntry> events;
  double virtual_time = 0.0;
  /// Workers stopped before n_steps: wall-clock limit (threaded) or a
  /// divergence flag with stop_on_divergence.
  bool truncated = false;
};

struct Envelope {
  WorkerId receiver = 0;
  MessagePtr message;
};

/// One participant of the asynchronous protocol. Owns its state outright;
/// the only input from outside is deliver().
class Worker {
 public:
  Worker(const TargetModel& model, WorkerConfig config, std::size_t num_workers,
         const RunOptions& options, ParameterState initial);

  /// One iteration: process every pending update, select a coordinate,
  /// sample it from its full conditional, and return the broadcast (one
  /// envelope per other worker if the coordinate is transmitted).
  std::vector<Envelope> step();

  /// Appends to the inbox; processed at the start of the next step().
  void deliver(MessagePtr message);
  /// Processes every pending update in arrival order. Returns the count.
  std::size_t drain_inbox();

  UpdateOutcome process_update(const UpdateMessage& msg);

  const WorkerConfig& config() const { return config_; }
  const ParameterState& state() const { return state_; }
  ParameterState& mutable_state() { return state_; }
  const Counters& counters() const { return counters_; }
  const WorkerDiagnostics& diagnostics() const { return diag_; }
  std::size_t inbox_size() const { return inbox_.size(); }
  std::uint64_t steps_taken() const { return counters_.steps; }
  void set_event_log(std::vector<EventLogEntry>* log, const double* clock) {
    event_log_ = log;
    virtual_clock_ = clock;
  }

 private:
  CoordinateId select_coordinate();
  void record();

  const TargetModel& model_;
  WorkerConfig config_;
  std::size_t num_workers_;
  std::uint64_t burn_in_;
  std::uint64_t thin_;
  std::size_t trace_limit_;
  std::size_t inbox_soft_limit_;
  ParameterState state_;
  Rng rng_;
  Rng reservoir_rng_;
  std::vector<CoordinateId> candidates_;
  std::vector<double> cumulative_;
  std::vector<bool> transmitted_;
  std::vector<std::uint64_t> send_clock_;
  std::vector<std::uint64_t> last_clock_;  // [sender * p + coord]
  std::deque<MessagePtr> inbox_;
  WorkerDiagnostics diag_;
  Counters counters_;
  std::vector<EventLogEntry>* event_log_ = nullptr;
  const double* virtual_clock_ = nullptr;
};

/// min{1, f(new) q(current) / (f(current) q(new))}: the MH probability of
/// moving the receiver's state[msg.coord] to msg.new_value, with the sender's
/// full conditional as the proposal.
double exact_acceptance_prob(const TargetModel& model, const ParameterState& state,
                             const UpdateMessage& msg);

/// Free-function forms of the worker operations.
std::vector<Envelope> worker_step(Worker& worker);
UpdateOutcome process_update(Worker& worker, const UpdateMessage& msg);

/// Rejects configurations that break coverage, ownership or probability
/// constraints. Throws ConfigError naming the field.
void validate_workers(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                      bool allow_multi_owner);

/// Splits the transmitted coordinates into contiguous groups, one per worker
/// (wrapping round-robin when there are more workers than coordinates, which
/// needs allow_multi_owner). Top-level coordinates become local on every
/// worker; selection is uniform over each worker's coordinates.
std::vector<WorkerConfig> partition_workers(const TargetModel& model, std::size_t num_workers,
                                            UpdateMode mode, double diag_sample_prob);

/// Deterministic discrete-event execution over a simulated network.
RunResult run_simulated(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                        const NetworkConfig& net, const Schedule& schedule,
                        const RunOptions& options);

/// One OS thread per worker, unbounded FIFO queues between them. Messages are
/// never dropped. Statistically equivalent to run_simulated, not bit-identical.
RunResult run_threaded(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                       const RunOptions& options,
                       std::chrono::milliseconds wall_clock_limit = std::chrono::minutes(10));

struct SequentialResult {
  std::vector<std::string> monitor_names;
  Trace trace;
  OnlineMoments moments;
  ParameterState final_state;
};

/// Single-chain sequential-scan Gibbs: each sweep updates coordinates 0..p-1
/// in order. Reference sampler for oracle comparisons.
SequentialResult run_sequential_scan(const TargetModel& model, std::uint64_t sweeps,
                                     std::uint64_t burn_in, std::uint64_t seed,
                                     std::uint64_t thin = 1, std::size_t trace_limit = 64);

}  // namespace asyncgibbs
