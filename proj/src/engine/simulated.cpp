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

#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/engine/engine.hpp"

namespace asyncgibbs {
namespace {

// Kind order doubles as the first tie-breaker: at equal virtual time,
// deliveries land in inboxes before any worker steps.
enum class EventKind : int { kDeliver = 0, kWorkerStep = 1 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kWorkerStep;
  WorkerId worker = 0;  // stepping worker or receiver
  std::uint64_t clock = 0;
  std::uint64_t seq = 0;
  MessagePtr message;
  double send_time = 0.0;

  auto key() const { return std::tie(time, kind, worker, clock, seq); }
};

struct Later {
  bool operator()(const Event& a, const Event& b) const { return a.key() > b.key(); }
};

double next_step_time(const Schedule& schedule, WorkerId w, std::size_t m, std::uint64_t k,
                      double now, Rng& rng) {
  switch (schedule.kind) {
    case ScheduleKind::kPoisson:
      return now + rng.exponential(schedule.rate);
    case ScheduleKind::kLockstep:
      return static_cast<double>(k);
    case ScheduleKind::kRoundRobin:
      return static_cast<double>((k - 1) * m + w + 1);
  }
  return now;
}

}  // namespace

RunResult run_simulated(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                        const NetworkConfig& net, const Schedule& schedule,
                        const RunOptions& options) {
  validate_workers(model, workers, options.allow_multi_owner);
  net.validate();
  if (schedule.kind == ScheduleKind::kPoisson && !(schedule.rate > 0.0)) {
    throw ConfigError("run.rate", "step rate must be positive");
  }

  const std::size_t m = workers.size();
  RunResult result;
  result.monitor_names = model.monitor_names();
  result.links.assign(m, std::vector<LinkCounters>(m));

  const ParameterState initial = model.initial_state_with_cache();
  double now = 0.0;
  std::vector<Worker> pool;
  pool.reserve(m);
  for (const auto& cfg : workers) {
    pool.emplace_back(model, cfg, m, options, initial);
    if (options.record_events) pool.back().set_event_log(&result.events, &now);
  }

  Rng net_rng(options.seed, kNetworkStream);
  std::priority_queue<Event, std::vector<Event>, Later> events;
  std::uint64_t seq = 0;
  std::vector<std::uint64_t> scheduled(m, 0);
  std::vector<std::vector<double>> link_last(m, std::vector<double>(m, -1.0));

  auto schedule_step = [&](WorkerId w) {
    if (scheduled[w] >= options.n_steps) return;
    ++scheduled[w];
    Event e;
    e.time = next_step_time(schedule, w, m, scheduled[w], now, net_rng);
    e.kind = EventKind::kWorkerStep;
    e.worker = w;
    e.clock = scheduled[w];
    e.seq = seq++;
    events.push(std::move(e));
  };
  for (WorkerId w = 0; w < m; ++w) schedule_step(w);

  while (!events.empty()) {
    Event e = events.top();
    events.pop();
    now = e.time;
    if (e.kind == EventKind::kDeliver) {
      auto& link = result.links[e.message->sender][e.worker];
      ++link.delivered;
      if (options.record_events) {
        result.events.push_back({EventLogEntry::Kind::kDeliver, now, e.worker, e.message->sender,
                                 e.message->coord, e.message->clock, e.send_time});
      }
      pool[e.worker].deliver(std::move(e.message));
      continue;
    }

    Worker& worker = pool[e.worker];
    std::vector<Envelope> out = worker.step();
    const bool broadcast_ok =
        net.drop_scope == DropScope::kPerBroadcast && !out.empty()
            ? net_rng.bernoulli(net.transmit_prob)
            : true;
    for (auto& env : out) {
      auto& link = result.links[e.worker][env.receiver];
      ++link.sent;
      const bool ok = net.drop_scope == DropScope::kPerBroadcast
                          ? broadcast_ok
                          : net_rng.bernoulli(net.transmit_prob);
      if (!ok) {
        ++link.dropped;
        ++result.totals.dropped;
        if (options.record_events) {
          result.events.push_back({EventLogEntry::Kind::kDrop, now, env.receiver, e.worker,
                                   env.message->coord, env.message->clock, now});
        }
        continue;
      }
      double at = now + net.latency.sample(net_rng);
      double& last = link_last[e.worker][env.receiver];
      if (net.fifo_per_link && at <= last) {
        at = std::nextafter(last, std::numeric_limits<double>::infinity());
      }
      last = std::max(last, at);
      if (options.record_events) {
        result.events.push_back({EventLogEntry::Kind::kSend, now, env.receiver, e.worker,
                                 env.message->coord, env.message->clock, now});
      }
      Event d;
      d.time = at;
      d.kind = EventKind::kDeliver;
      d.worker = env.receiver;
      d.clock = env.message->clock;
      d.seq = seq++;
      d.message = std::move(env.message);
      d.send_time = now;
      events.push(std::move(d));
    }
    if (options.stop_on_divergence && worker.diagnostics().divergence.flagged()) {
      result.truncated = true;
      break;
    }
    schedule_step(e.worker);
  }

  // Everything still in flight has landed; apply it so the final states and
  // counters reflect every delivered message.
  if (!result.truncated) {
    for (auto& worker : pool) worker.drain_inbox();
  }

  result.virtual_time = now;
  std::vector<WorkerDiagnostics> diags;
  for (auto& worker : pool) {
    result.worker_counters.push_back(worker.counters());
    diags.push_back(worker.diagnostics());
    result.final_states.push_back(worker.state());
  }
  Counters totals;
  for (const auto& c : result.worker_counters) totals += c;
  totals.dropped = result.totals.dropped;
  for (auto& c : result.worker_counters) c.dropped = 0;
  for (WorkerId s = 0; s < m; ++s) {
    for (WorkerId r = 0; r < m; ++r) result.worker_counters[s].dropped += result.links[s][r].dropped;
  }
  result.totals = totals;
  Rng merge_rng(options.seed, kMergeStream);
  result.diagnostics = DiagnosticsRecord::merge(diags, merge_rng);
  return result;
}

}  // namespace asyncgibbs
