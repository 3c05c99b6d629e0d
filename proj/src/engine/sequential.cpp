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

#include "asyncgibbs/core/error.hpp"
#include "asyncgibbs/engine/engine.hpp"

namespace asyncgibbs {

SequentialResult run_sequential_scan(const TargetModel& model, std::uint64_t sweeps,
                                     std::uint64_t burn_in, std::uint64_t seed,
                                     std::uint64_t thin, std::size_t trace_limit) {
  if (thin == 0) throw ConfigError("run.thin", "must be at least 1");
  SequentialResult out;
  out.monitor_names = model.monitor_names();
  out.moments = OnlineMoments(static_cast<Eigen::Index>(out.monitor_names.size()));
  const std::size_t width = std::min(trace_limit, out.monitor_names.size());
  out.trace.names.assign(out.monitor_names.begin(), out.monitor_names.begin() + width);

  ParameterState state = model.initial_state_with_cache();
  Rng rng(seed, kSamplingStream);
  const std::size_t p = model.num_coords();
  for (std::uint64_t s = 1; s <= sweeps; ++s) {
    for (std::size_t c = 0; c < p; ++c) {
      Draw draw = sample_full_conditional(model, state, CoordinateId{c}, rng);
      model.assign(state, CoordinateId{c}, std::move(draw.value), Version{0, s});
    }
    if (s <= burn_in || (s - burn_in) % thin != 0) continue;
    const Eigen::VectorXd row = model.monitor(state);
    out.moments.add(row);
    if (width > 0) out.trace.append(s, row.head(static_cast<Eigen::Index>(width)));
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace asyncgibbs
