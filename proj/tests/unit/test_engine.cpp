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
#include <map>
#include <numeric>
#include <tuple>

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/engine/engine.hpp"
#include "asyncgibbs/engine/jacobi.hpp"
#include "asyncgibbs/models/gaussian.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace asyncgibbs;
using testutil::max_abs_diff;
using testutil::mean_worker_se;

namespace {

RunOptions options(std::uint64_t seed, std::uint64_t steps) {
  RunOptions o;
  o.seed = seed;
  o.n_steps = steps;
  return o;
}

NetworkConfig network(double transmit, double latency) {
  NetworkConfig n;
  n.transmit_prob = transmit;
  n.latency = LatencyModel::constant(latency);
  return n;
}

UpdateMessage message(CoordinateId c, Value new_value, Value old_value, ProposalDescriptor q,
                      WorkerId sender, std::uint64_t clock) {
  return UpdateMessage{c, std::move(new_value), std::move(old_value), std::move(q),
                       sender, clock, std::nullopt};
}

// log N(x; 0, Σ) up to a constant.
double dense_log_density(const Eigen::MatrixXd& cov, const Eigen::VectorXd& x) {
  return -0.5 * x.dot(cov.ldlt().solve(x));
}

// Conditional of x_c given the rest, from the dense covariance.
GaussianScalar dense_conditional(const Eigen::MatrixXd& cov, const Eigen::VectorXd& x, int c) {
  const int n = static_cast<int>(x.size());
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (i != c) rest.push_back(i);
  Eigen::MatrixXd s_rr(n - 1, n - 1);
  Eigen::VectorXd s_cr(n - 1), x_r(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    s_cr(i) = cov(c, rest[i]);
    x_r(i) = x(rest[i]);
    for (int j = 0; j < n - 1; ++j) s_rr(i, j) = cov(rest[i], rest[j]);
  }
  const Eigen::VectorXd w = s_rr.ldlt().solve(s_cr);
  return {w.dot(x_r), cov(c, c) - s_cr.dot(w)};
}

}  // namespace

TEST_CASE("owned coordinate broadcast fans out to m-1 peers") {
  const auto model = build_exponential_target(8, 0.5);
  auto workers = partition_workers(model, 4, UpdateMode::kApproximate, 0.0);
  Worker w(model, workers[1], 4, options(3, 10), model.initial_state());
  for (int k = 0; k < 5; ++k) {
    const auto out = w.step();
    REQUIRE(out.size() == 3);
    std::vector<WorkerId> receivers;
    for (const auto& e : out) {
      receivers.push_back(e.receiver);
      CHECK(e.message == out.front().message);
      CHECK(e.message->sender == 1);
      CHECK(w.state()[e.message->coord] == e.message->new_value);
    }
    CHECK(receivers == std::vector<WorkerId>{0, 2, 3});
    const auto c = out.front().message->coord.index;
    CHECK((c == 2 || c == 3));
    CHECK(out.front().message->clock >= 1);
  }
  CHECK(w.counters().messages_sent == 15);
}

TEST_CASE("top-level coordinate emits nothing") {
  const testutil::ToyTopLevel model;
  WorkerConfig cfg;
  cfg.worker_id = 0;
  cfg.local_coords = {CoordinateId{1}};
  cfg.owned_coords = {};
  cfg.selection_probs = {1.0};
  Worker w(model, cfg, 3, options(1, 10), model.initial_state());
  for (int k = 0; k < 10; ++k) CHECK(w.step().empty());
  CHECK(w.counters().messages_sent == 0);
  CHECK(w.state()[CoordinateId{1}].as_scalar() != 0.0);
}

TEST_CASE("exact acceptance probability") {
  const auto model = build_exponential_target(8, 0.5);
  Rng rng(17);
  Eigen::VectorXd x(8);
  for (auto& v : x) v = rng.normal();
  const auto state = model.unflatten(x);
  const CoordinateId c{4};
  const auto draw = sample_full_conditional(model, state, c, rng);

  SUBCASE("receiver matches sender: the move is a Gibbs step") {
    const auto msg = message(c, draw.value, state[c], draw.proposal, 1, 1);
    CHECK(exact_acceptance_prob(model, state, msg) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("new value equals current value") {
    const auto msg = message(c, state[c], state[c], draw.proposal, 1, 1);
    CHECK(exact_acceptance_prob(model, state, msg) == 1.0);
  }
  SUBCASE("receiver lags by one coordinate: dense oracle") {
    // The receiver has an older value of coordinate 3 than the sender used.
    Eigen::VectorXd xr = x;
    xr(3) = x(3) - 1.3;
    const auto receiver = model.unflatten(xr);
    const Eigen::MatrixXd cov = model.covariance();
    const auto q = dense_conditional(cov, x, 4);
    auto log_q = [&](double v) { return -0.5 * (v - q.mean) * (v - q.mean) / q.variance; };
    // log α is linear in the move, so one of the two mirrored moves has α < 1.
    const double cur = x(4);
    bool saw_reject_side = false;
    for (double v : {draw.value.as_scalar(), 2 * cur - draw.value.as_scalar()}) {
      const auto msg = message(c, Value::scalar(v), state[c], draw.proposal, 1, 1);
      Eigen::VectorXd xn = xr;
      xn(4) = v;
      const double log_alpha = dense_log_density(cov, xn) - dense_log_density(cov, xr) +
                               log_q(xr(4)) - log_q(xn(4));
      const double expected = std::min(1.0, std::exp(log_alpha));
      saw_reject_side |= expected < 1.0 - 1e-6;
      CHECK(exact_acceptance_prob(model, receiver, msg) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
    CHECK(saw_reject_side);
  }
}

TEST_CASE("process_update outcomes") {
  const auto model = build_exponential_target(8, 0.5);
  auto cfgs = partition_workers(model, 2, UpdateMode::kApproximate, 0.0);
  const auto init = model.initial_state();
  const CoordinateId c{6};  // owned by worker 1
  const GaussianScalar q{0.0, 0.01};

  SUBCASE("approximate mode always applies") {
    Worker w(model, cfgs[0], 2, options(1, 10), init);
    const auto msg = message(c, Value::scalar(25.0), Value::scalar(0.0), q, 1, 1);
    CHECK(w.process_update(msg) == UpdateOutcome::kAccepted);
    CHECK(w.state()[c].as_scalar() == 25.0);
    CHECK(w.state().version(c) == Version{1, 1});
  }
  SUBCASE("exact mode rejects an implausible move") {
    cfgs[0].mode = UpdateMode::kExact;
    Worker w(model, cfgs[0], 2, options(1, 10), init);
    // Far in the target's tail, proposed by a narrow q that excludes the current value.
    const auto msg =
        message(c, Value::scalar(25.0), Value::scalar(0.0), GaussianScalar{25.0, 0.01}, 1, 1);
    CHECK(exact_acceptance_prob(model, init, msg) < 1e-100);
    CHECK(w.process_update(msg) == UpdateOutcome::kRejected);
    CHECK(w.state()[c].as_scalar() == 0.0);
    CHECK(w.counters().rejected == 1);
  }
  SUBCASE("exact mode accepts with probability 1") {
    cfgs[0].mode = UpdateMode::kExact;
    Worker w(model, cfgs[0], 2, options(1, 10), init);
    Rng rng(2);
    const auto draw = sample_full_conditional(model, init, c, rng);
    const auto msg = message(c, draw.value, init[c], draw.proposal, 1, 1);
    CHECK(w.process_update(msg) == UpdateOutcome::kAccepted);
    CHECK(w.state()[c] == draw.value);
  }
  SUBCASE("stale clocks are discarded") {
    Worker w(model, cfgs[0], 2, options(1, 10), init);
    CHECK(w.process_update(message(c, Value::scalar(1.0), Value::scalar(0.0), q, 1, 5)) ==
          UpdateOutcome::kAccepted);
    CHECK(w.process_update(message(c, Value::scalar(2.0), Value::scalar(1.0), q, 1, 5)) ==
          UpdateOutcome::kStale);
    CHECK(w.process_update(message(c, Value::scalar(3.0), Value::scalar(1.0), q, 1, 4)) ==
          UpdateOutcome::kStale);
    CHECK(w.state()[c].as_scalar() == 1.0);
    CHECK(w.process_update(message(c, Value::scalar(4.0), Value::scalar(1.0), q, 1, 6)) ==
          UpdateOutcome::kAccepted);
    CHECK(w.counters().stale == 2);
  }
  SUBCASE("shape mismatch is an error") {
    Worker w(model, cfgs[0], 2, options(1, 10), init);
    const auto msg = message(c, Value::vector(Eigen::Vector2d::Zero()), Value::scalar(0.0), q, 1, 1);
    CHECK_THROWS_AS(w.process_update(msg), Error);
  }
}

TEST_CASE("single worker is random-scan Gibbs") {
  const auto model = build_exponential_target(3, 0.5);
  const auto cfgs = partition_workers(model, 1, UpdateMode::kApproximate, 0.0);
  auto opts = options(9, 5000);
  const auto r = run_simulated(model, cfgs, NetworkConfig{}, Schedule{}, opts);

  // Reference chain with the same seed policy.
  Rng rng(worker_seed(9, 0), kSamplingStream);
  ParameterState s = model.initial_state();
  std::vector<double> cumulative(3);
  std::partial_sum(cfgs[0].selection_probs.begin(), cfgs[0].selection_probs.end(),
                   cumulative.begin());
  for (int t = 0; t < 5000; ++t) {
    const double u = rng.uniform() * cumulative.back();
    const auto k = std::min<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(), 2);
    auto d = sample_full_conditional(model, s, CoordinateId{k}, rng);
    s.set(CoordinateId{k}, d.value);
  }
  CHECK(r.final_states[0].values() == s.values());

  auto exact_cfgs = cfgs;
  exact_cfgs[0].mode = UpdateMode::kExact;
  const auto re = run_simulated(model, exact_cfgs, NetworkConfig{}, Schedule{}, opts);
  CHECK(re.final_states[0].values() == r.final_states[0].values());
  CHECK(r.totals.messages_sent == 0);
}

TEST_CASE("single worker moments match the target") {
  const auto model = build_exponential_target(3, 0.5);
  const auto cfgs = partition_workers(model, 1, UpdateMode::kApproximate, 0.0);
  auto opts = options(4, 200000);
  opts.thin = 3;
  const auto r = run_simulated(model, cfgs, NetworkConfig{}, Schedule{}, opts);
  const auto& m = r.diagnostics.pooled_moments;
  for (Eigen::Index k = 0; k < 3; ++k) {
    CHECK(std::abs(m.mean()(k)) < 3 * mean_worker_se(r, static_cast<std::size_t>(k)));
  }
  CHECK(frobenius_relative_error(m.covariance(), model.covariance()) < 0.05);
}

TEST_CASE("zero latency round robin reproduces the hand-stepped sequential chain") {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.6, 0.6, 1.0;
  const auto model = GaussianTarget::from_covariance(Eigen::VectorXd::Zero(2), cov);
  const auto cfgs = partition_workers(model, 2, UpdateMode::kApproximate, 0.0);
  auto opts = options(77, 50);
  opts.burn_in = 0;
  opts.record_events = true;
  const Schedule rr{ScheduleKind::kRoundRobin, 1.0};
  const auto r = run_simulated(model, cfgs, network(1.0, 0.0), rr, opts);

  // Each worker owns one coordinate, so it never draws a selection number.
  Rng r0(worker_seed(77, 0), kSamplingStream), r1(worker_seed(77, 1), kSamplingStream);
  double x0 = 0.0, x1 = 0.0;
  std::vector<double> t0, t1;  // worker 0's view after its step, worker 1's after its step
  for (int k = 0; k < 50; ++k) {
    x0 = 0.6 * x1 + std::sqrt(0.64) * r0.normal();
    t0.push_back(x0);
    x1 = 0.6 * x0 + std::sqrt(0.64) * r1.normal();
    t1.push_back(x1);
  }
  REQUIRE(r.diagnostics.traces.size() == 2);
  const auto w0 = r.diagnostics.traces[0].column(0);
  const auto w1 = r.diagnostics.traces[1].column(1);
  REQUIRE(w0.size() == 50);
  for (int k = 0; k < 50; ++k) {
    CHECK(w0[k] == doctest::Approx(t0[k]).epsilon(1e-12));
    CHECK(w1[k] == doctest::Approx(t1[k]).epsilon(1e-12));
  }
  CHECK(r.final_states[0][CoordinateId{1}].as_scalar() == doctest::Approx(x1).epsilon(1e-12));
  CHECK(r.final_states[1][CoordinateId{0}].as_scalar() == doctest::Approx(x0).epsilon(1e-12));

  SUBCASE("exact mode accepts every update (synchronous parallel chain)") {
    auto exact = cfgs;
    for (auto& c : exact) c.mode = UpdateMode::kExact;
    const auto re = run_simulated(model, exact, network(1.0, 0.0), rr, opts);
    CHECK(re.totals.rejected == 0);
    CHECK(re.totals.exact_decisions > 0);
    CHECK(re.totals.exact_alpha_sum / re.totals.exact_decisions ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("link counters, event ordering and clocks") {
  const auto model = build_exponential_target(8, 0.5);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kExact, 0.1);
  auto opts = options(5, 2000);
  opts.record_events = true;
  NetworkConfig net;
  net.transmit_prob = 0.6;
  net.latency = LatencyModel::uniform(0.2, 3.0);
  for (auto scope : {DropScope::kPerLink, DropScope::kPerBroadcast}) {
    net.drop_scope = scope;
    const auto r = run_simulated(model, cfgs, net, Schedule{}, opts);
    std::uint64_t sent = 0, dropped = 0;
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(r.links[s][s].sent == 0);
      for (std::size_t t = 0; t < 4; ++t) {
        const auto& l = r.links[s][t];
        CHECK(l.sent == l.delivered + l.dropped);
        sent += l.sent;
        dropped += l.dropped;
      }
    }
    CHECK(sent == r.totals.messages_sent);
    CHECK(dropped == r.totals.dropped);
    CHECK(r.totals.delivered + r.totals.dropped == r.totals.messages_sent);
    CHECK(r.totals.processed == r.totals.delivered);
    CHECK(r.totals.accepted + r.totals.rejected + r.totals.stale == r.totals.processed);
    CHECK(r.totals.steps == 8000);
    const double frac = static_cast<double>(dropped) / static_cast<double>(sent);
    CHECK(std::abs(frac - 0.4) < 0.05);

    double last_time = 0.0;
    std::map<std::tuple<WorkerId, WorkerId, std::size_t>, std::uint64_t> applied;
    for (const auto& e : r.events) {
      CHECK(e.time >= last_time);
      last_time = e.time;
      if (e.kind == EventLogEntry::Kind::kDeliver) CHECK(e.time >= e.send_time + 0.2);
      if (e.kind == EventLogEntry::Kind::kProcess &&
          e.outcome != UpdateOutcome::kStale) {
        auto& prev = applied[{e.worker, e.sender, e.coord.index}];
        CHECK(e.clock > prev);
        prev = e.clock;
      }
    }
  }
}

TEST_CASE("simulated runs are bit-identical for equal seeds") {
  const auto model = build_exponential_target(8, 0.5);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kExact, 0.2);
  auto opts = options(123, 3000);
  NetworkConfig net = network(0.75, 0.3);
  const auto a = run_simulated(model, cfgs, net, Schedule{}, opts);
  const auto b = run_simulated(model, cfgs, net, Schedule{}, opts);
  for (std::size_t w = 0; w < 4; ++w) CHECK(a.final_states[w].values() == b.final_states[w].values());
  CHECK(a.diagnostics.pooled_moments.mean() == b.diagnostics.pooled_moments.mean());
  CHECK(a.diagnostics.pooled_moments.covariance() == b.diagnostics.pooled_moments.covariance());
  CHECK(a.totals.accepted == b.totals.accepted);
  CHECK(a.virtual_time == b.virtual_time);
  REQUIRE(a.diagnostics.mh_ratios.items().size() == b.diagnostics.mh_ratios.items().size());
  for (std::size_t i = 0; i < a.diagnostics.mh_ratios.items().size(); ++i) {
    CHECK(a.diagnostics.mh_ratios.items()[i].alpha == b.diagnostics.mh_ratios.items()[i].alpha);
  }
  opts.seed = 124;
  const auto c = run_simulated(model, cfgs, net, Schedule{}, opts);
  CHECK(c.final_states[0].values() != a.final_states[0].values());
}

TEST_CASE("approximate mode never rejects") {
  const auto model = build_jacobi_target(4);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kApproximate, 0.5);
  const auto r = run_simulated(model, cfgs, network(0.9, 0.5), Schedule{}, options(2, 1000));
  CHECK(r.totals.rejected == 0);
  CHECK(r.totals.accepted + r.totals.stale == r.totals.processed);
  CHECK(r.totals.alpha_evaluations > 0);
  CHECK(r.diagnostics.mh_ratios.seen() == r.totals.alpha_evaluations);
}

TEST_CASE("exact-mode stationarity, 3-D Gaussian, 4 workers, latency and drops") {
  Eigen::Matrix3d cov;
  cov << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
  const auto model = GaussianTarget::from_covariance(Eigen::VectorXd::Zero(3), cov);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kExact, 0.0);
  auto opts = options(31, 400000);
  opts.allow_multi_owner = true;
  opts.thin = 10;
  NetworkConfig net = network(0.75, 0.1);
  const auto r = run_simulated(model, cfgs, net, Schedule{}, opts);
  const auto& m = r.diagnostics.pooled_moments;
  const Eigen::MatrixXd est = m.covariance();
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(std::abs(m.mean()(i)) < 3 * mean_worker_se(r, static_cast<std::size_t>(i)));
    for (Eigen::Index j = 0; j <= i; ++j) {
      double se = 0.0;
      for (const auto& t : r.diagnostics.traces) {
        const auto a = t.column(static_cast<std::size_t>(i));
        const auto b = t.column(static_cast<std::size_t>(j));
        std::vector<double> prod(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) prod[k] = a[k] * b[k];
        se += batch_means_se(prod);
      }
      se /= static_cast<double>(r.diagnostics.traces.size());
      INFO("cov(" << i << "," << j << ") = " << est(i, j) << " vs " << cov(i, j) << ", se " << se);
      CHECK(std::abs(est(i, j) - cov(i, j)) < 3 * se);
    }
  }
}

TEST_CASE("threaded transport agrees with the simulated transport") {
  const auto model = build_exponential_target(8, 0.5);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kApproximate, 0.0);
  auto opts = options(8, 400000);
  opts.thin = 10;
  const auto sim = run_simulated(model, cfgs, network(1.0, 0.1), Schedule{}, opts);
  const auto thr = run_threaded(model, cfgs, opts, std::chrono::seconds(120));
  REQUIRE_FALSE(thr.truncated);
  CHECK(thr.totals.steps == 1600000);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 4; ++t) CHECK(thr.links[s][t].delivered <= thr.links[s][t].sent);
  const Eigen::VectorXd ms = sim.diagnostics.pooled_moments.mean();
  const Eigen::VectorXd mt = thr.diagnostics.pooled_moments.mean();
  for (Eigen::Index k = 0; k < 8; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    // Few, long batches: with threads time-sliced on a small machine, staleness
    // spans whole scheduler quanta.
    const double se = std::hypot(mean_worker_se(sim, kk, 10), mean_worker_se(thr, kk, 10));
    CHECK(std::abs(ms(k) - mt(k)) < 3 * se);
  }

  SUBCASE("single worker threaded vs simulated") {
    const auto one = partition_workers(model, 1, UpdateMode::kApproximate, 0.0);
    auto o1 = options(8, 400000);
    o1.thin = 5;
    const auto s1 = run_simulated(model, one, NetworkConfig{}, Schedule{}, o1);
    const auto t1 = run_threaded(model, one, o1);
    // Same seed policy and no messages: the single thread replays the same chain.
    CHECK(s1.final_states[0].values() == t1.final_states[0].values());
    for (Eigen::Index k = 0; k < 8; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double se = std::hypot(mean_worker_se(s1, kk), mean_worker_se(t1, kk));
      CHECK(std::abs(s1.diagnostics.pooled_moments.mean()(k) -
                     t1.diagnostics.pooled_moments.mean()(k)) <= 3 * se);
    }
  }
}

TEST_CASE("threaded transport rejects event logs and stops at the wall clock") {
  const auto model = build_exponential_target(8, 0.5);
  const auto cfgs = partition_workers(model, 4, UpdateMode::kApproximate, 0.0);
  auto opts = options(1, 100);
  opts.record_events = true;
  CHECK_THROWS_AS(run_threaded(model, cfgs, opts), ConfigError);
  opts.record_events = false;
  opts.n_steps = 1'000'000'000;
  const auto r = run_threaded(model, cfgs, opts, std::chrono::milliseconds(200));
  CHECK(r.truncated);
}

TEST_CASE("configuration errors are rejected up front") {
  const auto model = build_exponential_target(4, 0.5);
  auto cfgs = partition_workers(model, 2, UpdateMode::kApproximate, 0.0);
  SUBCASE("uncovered coordinate") {
    cfgs[1].owned_coords.pop_back();
    cfgs[1].selection_probs = {1.0};
    CHECK_THROWS_AS(validate_workers(model, cfgs, false), ConfigError);
  }
  SUBCASE("probabilities do not sum to 1") {
    cfgs[0].selection_probs = {0.3, 0.3};
    CHECK_THROWS_AS(validate_workers(model, cfgs, false), ConfigError);
  }
  SUBCASE("zero probability") {
    cfgs[0].selection_probs = {1.0, 0.0};
    CHECK_THROWS_AS(validate_workers(model, cfgs, false), ConfigError);
  }
  SUBCASE("multi-owner needs opt-in") {
    auto four = partition_workers(model, 6, UpdateMode::kApproximate, 0.0);
    CHECK_THROWS_AS(validate_workers(model, four, false), ConfigError);
    CHECK_NOTHROW(validate_workers(model, four, true));
  }
  SUBCASE("bad network") {
    NetworkConfig net;
    net.transmit_prob = 0.0;
    CHECK_THROWS_AS(run_simulated(model, cfgs, net, Schedule{}, options(1, 10)), ConfigError);
    net.transmit_prob = 1.0;
    net.latency = LatencyModel::constant(-1.0);
    CHECK_THROWS_AS(run_simulated(model, cfgs, net, Schedule{}, options(1, 10)), ConfigError);
  }
  SUBCASE("top-level coordinate cannot be owned") {
    const testutil::ToyTopLevel toy;
    WorkerConfig w;
    w.owned_coords = {CoordinateId{0}, CoordinateId{1}};
    w.local_coords = {CoordinateId{1}};
    w.selection_probs = {0.3, 0.3, 0.4};
    CHECK_THROWS_AS(validate_workers(toy, {w}, false), ConfigError);
  }
}

TEST_CASE("partition_workers layout") {
  const testutil::ToyTopLevel toy;
  const auto cfgs = partition_workers(toy, 1, UpdateMode::kExact, 0.1);
  REQUIRE(cfgs.size() == 1);
  CHECK(cfgs[0].owned_coords == std::vector<CoordinateId>{CoordinateId{0}});
  CHECK(cfgs[0].local_coords == std::vector<CoordinateId>{CoordinateId{1}});
  CHECK(cfgs[0].selection_probs == std::vector<double>{0.5, 0.5});
  const auto model = build_exponential_target(8, 0.5);
  const auto four = partition_workers(model, 4, UpdateMode::kExact, 0.0);
  for (std::size_t w = 0; w < 4; ++w) {
    CHECK(four[w].owned_coords ==
          std::vector<CoordinateId>{CoordinateId{2 * w}, CoordinateId{2 * w + 1}});
  }
}

TEST_CASE("latency models") {
  Rng rng(3);
  CHECK(LatencyModel::constant(0.4).sample(rng) == 0.4);
  double lo = 1e9, hi = -1e9, sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = LatencyModel::uniform(1.0, 2.0).sample(rng);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += LatencyModel::geometric(0.25).sample(rng);
  }
  CHECK(lo >= 1.0);
  CHECK(hi <= 2.0);
  CHECK(std::abs(sum / 10000 - 3.0) < 0.2);
  CHECK_THROWS_AS(LatencyModel::uniform(2.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(LatencyModel::geometric(0.0).validate(), ConfigError);
}

TEST_CASE("jacobi_step") {
  SUBCASE("diagonal precision reaches stationarity in one step") {
    const Eigen::Vector3d prec(1.0, 4.0, 0.25);
    const GaussianTarget t(Eigen::VectorXd::Zero(3), Eigen::MatrixXd(prec.asDiagonal()));
    Rng rng(1);
    const Eigen::VectorXd far = Eigen::Vector3d(100.0, -50.0, 30.0);
    const int n = 50000;
    Eigen::Vector3d s1 = Eigen::Vector3d::Zero(), s2 = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = jacobi_step(t, far, rng);
      s1 += x;
      s2 += x.cwiseProduct(x);
    }
    const Eigen::Vector3d var = prec.cwiseInverse();
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(s1(k) / n) < 4 * std::sqrt(var(k) / n));
      CHECK(s2(k) / n == doctest::Approx(var(k)).epsilon(0.03));
    }
  }
  SUBCASE("expected next state is the Jacobi iteration matrix applied to the state") {
    const auto t = build_exponential_target(8, 0.5);
    const Eigen::MatrixXd b = jacobi_iteration_matrix(t.precision());
    Rng rng(2);
    Eigen::VectorXd x(8);
    for (auto& v : x) v = 5.0 * rng.normal();
    const int n = 40000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < n; ++i) sum += jacobi_step(t, x, rng);
    const Eigen::VectorXd expected = b * x;
    const Eigen::VectorXd sd = t.precision().diagonal().cwiseInverse().cwiseSqrt();
    for (int k = 0; k < 8; ++k) CHECK(std::abs(sum(k) / n - expected(k)) < 4 * sd(k) / std::sqrt(n));
  }
  SUBCASE("spectral radii") {
    const double rj = spectral_radius(jacobi_iteration_matrix(build_jacobi_target(8).precision()));
    const double re =
        spectral_radius(jacobi_iteration_matrix(build_exponential_target(8, 0.5).precision()));
    CHECK(rj == doctest::Approx(7.0 / 1.01).epsilon(1e-10));
    CHECK(rj > 1.0);
    CHECK(re < 1.0);
    // Iterated expectations grow on the Jacobi target and contract on the exponential one.
    const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(8);
    Eigen::VectorXd xj = x0, xe = x0;
    const Eigen::MatrixXd bj = jacobi_iteration_matrix(build_jacobi_target(8).precision());
    const Eigen::MatrixXd be = jacobi_iteration_matrix(build_exponential_target(8, 0.5).precision());
    for (int k = 0; k < 50; ++k) {
      xj = bj * xj;
      xe = be * xe;
    }
    CHECK(xj.norm() > 1e20);
    CHECK(xe.norm() < 1e-3);
  }
}

TEST_CASE("run_jacobi flags divergence on the Jacobi target only") {
  const auto jac = run_jacobi(build_jacobi_target(8), Eigen::VectorXd::Zero(8), 10000, 1e6, 1);
  CHECK(jac.diverged);
  REQUIRE(jac.divergence_step.has_value());
  CHECK(*jac.divergence_step <= 10000);
  CHECK(jac.steps == *jac.divergence_step);
  const auto ex = run_jacobi(build_exponential_target(8, 0.5), Eigen::VectorXd::Zero(8), 100000,
                             1e6, 1);
  CHECK_FALSE(ex.diverged);
  CHECK(ex.steps == 100000);
  CHECK(ex.final_state.allFinite());
  CHECK(ex.moments.mean().cwiseAbs().maxCoeff() < 0.1);
}
