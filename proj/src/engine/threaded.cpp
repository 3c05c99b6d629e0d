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

#include <atomic>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/engine/engine.hpp"

namespace asyncgibbs {
namespace {

class MessageQueue {
 public:
  void push(MessagePtr msg) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(msg));
  }

  std::deque<MessagePtr> take_all() {
    std::deque<MessagePtr> out;
    std::lock_guard lock(mutex_);
    out.swap(queue_);
    return out;
  }

 private:
  std::mutex mutex_;
  std::deque<MessagePtr> queue_;
};

}  // namespace

RunResult run_threaded(const TargetModel& model, const std::vector<WorkerConfig>& workers,
                       const RunOptions& options, std::chrono::milliseconds wall_clock_limit) {
  validate_workers(model, workers, options.allow_multi_owner);
  if (options.record_events) {
    throw ConfigError("run.record_events", "event logs are only available in simulated runs");
  }
  const std::size_t m = workers.size();
  RunResult result;
  result.monitor_names = model.monitor_names();
  result.links.assign(m, std::vector<LinkCounters>(m));

  const ParameterState initial = model.initial_state_with_cache();
  std::vector<Worker> pool;
  pool.reserve(m);
  for (const auto& cfg : workers) pool.emplace_back(model, cfg, m, options, initial);

  std::vector<MessageQueue> queues(m);
  std::vector<std::vector<std::uint64_t>> sent(m, std::vector<std::uint64_t>(m, 0));
  std::atomic<bool> abort{false};
  std::atomic<bool> timed_out{false};
  std::atomic<bool> diverged{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const auto deadline = std::chrono::steady_clock::now() + wall_clock_limit;

  auto body = [&](WorkerId w) {
    Worker& worker = pool[w];
    try {
      for (std::uint64_t k = 0; k < options.n_steps; ++k) {
        if (abort.load(std::memory_order_relaxed)) return;
        if ((k & 63) == 0 && std::chrono::steady_clock::now() > deadline) {
          timed_out = true;
          abort = true;
          return;
        }
        for (auto& msg : queues[w].take_all()) worker.deliver(std::move(msg));
        for (auto& env : worker.step()) {
          ++sent[w][env.receiver];
          queues[env.receiver].push(std::move(env.message));
        }
        if (options.stop_on_divergence && worker.diagnostics().divergence.flagged()) {
          diverged = true;
          abort = true;
          return;
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      abort = true;
    }
  };

  {
    std::vector<std::jthread> threads;
    threads.reserve(m);
    for (WorkerId w = 0; w < m; ++w) threads.emplace_back(body, w);
  }
  if (first_error) std::rethrow_exception(first_error);
  result.truncated = timed_out.load() || diverged.load();

  if (!diverged.load()) {
    for (WorkerId w = 0; w < m; ++w) {
      for (auto& msg : queues[w].take_all()) pool[w].deliver(std::move(msg));
      pool[w].drain_inbox();
    }
  }

  std::vector<WorkerDiagnostics> diags;
  for (WorkerId s = 0; s < m; ++s) {
    for (WorkerId r = 0; r < m; ++r) {
      result.links[s][r].sent = sent[s][r];
      result.links[s][r].delivered = sent[s][r];
    }
  }
  for (auto& worker : pool) {
    result.worker_counters.push_back(worker.counters());
    result.totals += worker.counters();
    diags.push_back(worker.diagnostics());
    result.final_states.push_back(worker.state());
  }
  Rng merge_rng(options.seed, kMergeStream);
  result.diagnostics = DiagnosticsRecord::merge(diags, merge_rng);
  return result;
}

}  // namespace asyncgibbs
