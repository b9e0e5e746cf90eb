/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The logstep Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "logstep/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/numeric.hpp"

namespace logstep {

OutputDistribution OutputDistribution::from_steps(std::span<const double> steps) {
  if (steps.empty()) throw DegenerateDistributionError("empty step sequence");
  for (double eta : steps) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
      throw InputError(fmt::format("step sizes must be finite and nonnegative, got {}", eta));
    }
  }
  const double total = compensated_sum(steps);
  if (!(total > 0.0)) throw DegenerateDistributionError("all step sizes are zero");

  OutputDistribution dist;
  dist.probs_.resize(steps.size());
  const double inv_total = 1.0 / total;
  std::transform(steps.begin(), steps.end(), dist.probs_.begin(), [&](double eta) { return eta * inv_total; });

  dist.cdf_.resize(steps.size());
  CompensatedSum running;
  for (std::size_t k = 0; k < dist.probs_.size(); ++k) {
    running.add(dist.probs_[k]);
    dist.cdf_[k] = running.value();
  }
  return dist;
}

OutputDistribution build_distribution(const StepSchedule& schedule) {
  const auto steps = schedule_table(schedule);
  return OutputDistribution::from_steps(steps);
}

int sample_iterate(const OutputDistribution& dist, std::mt19937_64& rng) {
  const auto cdf = dist.cumulative();
  std::uniform_real_distribution<double> uniform(0.0, cdf.back());
  const double u = uniform(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) {
    // u can round onto cdf.back(); take the last epoch with positive mass.
    it = std::prev(cdf.end());
    const auto probs = dist.probs();
    while (it != cdf.begin() && probs[static_cast<std::size_t>(it - cdf.begin())] == 0.0) --it;
  }
  return static_cast<int>(it - cdf.begin()) + 1;
}

double tail_mass(const OutputDistribution& dist, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError(fmt::format("tail fraction must lie in (0, 1], got {}", fraction));
  }
  const int T = dist.horizon();
  // Guard against 0.75 * 100 landing on 75.00000000000001.
  const auto cutoff = static_cast<int>(std::ceil((1.0 - fraction) * T - 1e-9));
  CompensatedSum acc;
  for (int t = std::max(cutoff, 0) + 1; t <= T; ++t) acc.add(dist.prob(t));
  return acc.value();
}

double weighted_grad_measure(std::span<const double> grad_sq, const OutputDistribution& dist) {
  if (static_cast<int>(grad_sq.size()) != dist.horizon()) {
    throw InputError(fmt::format("gradient trace has {} entries, distribution has {}", grad_sq.size(),
                                 dist.horizon()));
  }
  const auto probs = dist.probs();
  CompensatedSum acc;
  for (std::size_t k = 0; k < grad_sq.size(); ++k) acc.add(probs[k] * grad_sq[k]);
  return acc.value();
}

DistributionComparison compare_distributions(std::span<const StepSchedule> schedules) {
  DistributionComparison out;
  if (schedules.empty()) return out;
  out.T = schedules.front().T;
  for (const auto& schedule : schedules) {
    if (schedule.T != out.T) throw InputError("compared schedules must share the horizon T");
    const auto dist = build_distribution(schedule);
    out.labels.emplace_back(to_string(schedule.kind));
    out.columns.emplace_back(dist.probs().begin(), dist.probs().end());
  }
  return out;
}

}  // namespace logstep
