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

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/optimizer.hpp"

namespace logstep {

std::vector<double> default_coarse_grid() {
  return {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

std::vector<GridEntry> GridResult::ranked() const {
  auto out = table;
  std::stable_sort(out.begin(), out.end(), [](const GridEntry& a, const GridEntry& b) { return a.mean_val < b.mean_val; });
  return out;
}

namespace {

GridEntry evaluate_point(const ProblemBundle& bundle, RunConfig config, double eta0, int stage) {
  config.schedule.eta0 = eta0;
  GridEntry entry;
  entry.eta0 = eta0;
  entry.stage = stage;
  double sum = 0.0;
  for (const auto seed : config.seeds) {
    const auto trace = run(bundle, config, seed);
    if (trace.status == RunStatus::diverged) {
      ++entry.diverged;
      entry.per_seed.push_back(std::numeric_limits<double>::infinity());
    } else {
      entry.per_seed.push_back(trace.final_val_metric);
      sum += trace.final_val_metric;
    }
  }
  entry.mean_val = entry.diverged > 0 ? std::numeric_limits<double>::infinity()
                                      : sum / static_cast<double>(config.seeds.size());
  return entry;
}

// Snaps 0.4 + 3 * 0.01 = 0.43000000000000005 back onto 0.43.
double snap(double value) { return std::round(value * 1e12) / 1e12; }

std::size_t argmin(const std::vector<GridEntry>& table) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < table.size(); ++k) {
    if (table[k].mean_val < table[best].mean_val) best = k;
  }
  return best;
}

}  // namespace

GridResult grid_search(const ProblemBundle& bundle, const RunConfig& config_template, std::span<const double> coarse,
                       double fine_radius, double fine_step) {
  if (coarse.empty()) throw DomainError("coarse grid is empty");
  if (!(fine_radius >= 0.0)) throw DomainError("fine radius must be nonnegative");
  if (fine_radius > 0.0 && !(fine_step > 0.0)) throw DomainError("fine step must be positive");
  for (double eta0 : coarse) {
    if (!(eta0 > 0.0)) throw DomainError(fmt::format("grid values must be positive, got {}", eta0));
  }

  GridResult result;
  for (double eta0 : coarse) result.table.push_back(evaluate_point(bundle, config_template, eta0, 1));
  if (!std::isfinite(result.table[argmin(result.table)].mean_val)) {
    throw NoWinnerError("every coarse grid point diverged");
  }

  if (fine_radius > 0.0) {
    const double center = result.table[argmin(result.table)].eta0;
    const auto steps = static_cast<int>(std::floor(fine_radius / fine_step + 1e-9));
    for (int k = -steps; k <= steps; ++k) {
      if (k == 0) continue;
      const double eta0 = snap(center + k * fine_step);
      if (!(eta0 > 0.0)) continue;
      const bool seen = std::any_of(result.table.begin(), result.table.end(), [&](const GridEntry& e) {
        return std::abs(e.eta0 - eta0) <= 1e-12 * std::max(1.0, eta0);
      });
      if (!seen) result.table.push_back(evaluate_point(bundle, config_template, eta0, 2));
    }
  }
  result.best_eta0 = result.table[argmin(result.table)].eta0;
  return result;
}

}  // namespace logstep
