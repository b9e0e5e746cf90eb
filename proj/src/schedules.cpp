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

#include "logstep/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "logstep/error.hpp"

namespace logstep {

namespace {

void check_horizon(int T) {
  if (T < 2) throw DomainError(fmt::format("horizon T must be >= 2, got {}", T));
}

void check_inner_epoch(int t, int T) {
  check_horizon(T);
  if (t < 1 || t > T) throw DomainError(fmt::format("epoch t={} outside [1, {}]", t, T));
}

void check_eta0(double eta0) {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) {
    throw DomainError(fmt::format("eta0 must be positive and finite, got {}", eta0));
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError(fmt::format("alpha must be nonnegative, got {}", alpha));
  }
}

void check_reduction_factor(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError(fmt::format("reduction factor alpha must lie in [0, 1], got {}", alpha));
  }
}

constexpr struct {
  ScheduleKind kind;
  std::string_view name;
} kKindNames[] = {
    {ScheduleKind::constant, "constant"},       {ScheduleKind::inv_t, "inv_t"},
    {ScheduleKind::inv_sqrt_t, "inv_sqrt_t"},   {ScheduleKind::cosine, "cosine"},
    {ScheduleKind::exponential, "exponential"}, {ScheduleKind::logarithmic, "logarithmic"},
    {ScheduleKind::stagewise, "stagewise"},     {ScheduleKind::plateau, "plateau"},
};

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw DomainError(fmt::format("unknown schedule kind '{}'", name));
}

double log_step(int t, int T, double eta0) {
  check_inner_epoch(t, T);
  // ln t / ln T is exactly 0 at t = 1 and exactly 1 at t = T.
  return eta0 * (1.0 - std::log(static_cast<double>(t)) / std::log(static_cast<double>(T)));
}

double cosine_step(int t, int T, double eta0) {
  check_inner_epoch(t, T);
  const double fraction = static_cast<double>(t) / static_cast<double>(T);
  return eta0 / 2.0 * (1.0 + std::cos(std::numbers::pi * fraction));
}

double constant_step(double eta0) { return eta0; }

double inv_t_step(int t, double eta0, double alpha) {
  check_alpha(alpha);
  if (t < 1) throw DomainError(fmt::format("epoch t={} must be >= 1", t));
  return eta0 / (1.0 + alpha * static_cast<double>(t));
}

double inv_sqrt_t_step(int t, double eta0, double alpha) {
  check_alpha(alpha);
  if (t < 1) throw DomainError(fmt::format("epoch t={} must be >= 1", t));
  return eta0 / (1.0 + alpha * std::sqrt(static_cast<double>(t)));
}

double exponential_step(int t, int T, double eta0, double beta) {
  check_horizon(T);
  if (!(beta > 0.0 && beta < static_cast<double>(T))) {
    throw DomainError(fmt::format("exponential beta must lie in (0, T={}), got {}", T, beta));
  }
  if (t < 0 || t > T) throw DomainError(fmt::format("epoch t={} outside [0, {}]", t, T));
  return eta0 * std::pow(beta / static_cast<double>(T), static_cast<double>(t) / static_cast<double>(T));
}

double stagewise_step(int t, double eta0, double alpha, std::span<const int> milestones) {
  const auto passed = std::upper_bound(milestones.begin(), milestones.end(), t) - milestones.begin();
  double eta = eta0;
  for (std::ptrdiff_t k = 0; k < passed; ++k) eta *= alpha;
  return eta;
}

std::vector<int> default_milestones(int T, int count) {
  check_horizon(T);
  std::vector<int> out;
  if (count == 1) {
    out = {(T + 1) / 2};
  } else if (count == 2) {
    out = {(T + 2) / 3, (2 * T + 2) / 3};
  } else {
    throw DomainError(fmt::format("default milestones exist for 1 or 2 stages, got {}", count));
  }
  for (int m : out) {
    if (m <= 1 || m >= T) {
      throw DomainError(fmt::format("horizon T={} too short for {} milestone(s)", T, count));
    }
  }
  if (count == 2 && out[0] >= out[1]) {
    throw DomainError(fmt::format("horizon T={} too short for 2 distinct milestones", T));
  }
  return out;
}

void StepSchedule::validate() const {
  check_eta0(eta0);
  check_horizon(T);
  switch (kind) {
    case ScheduleKind::inv_t:
    case ScheduleKind::inv_sqrt_t:
      check_alpha(alpha);
      break;
    case ScheduleKind::exponential:
      if (!(beta > 0.0 && beta < static_cast<double>(T))) {
        throw DomainError(fmt::format("exponential beta must lie in (0, T={}), got {}", T, beta));
      }
      break;
    case ScheduleKind::stagewise:
      check_reduction_factor(alpha);
      for (std::size_t k = 0; k < milestones.size(); ++k) {
        if (milestones[k] <= 1 || milestones[k] >= T) {
          throw DomainError(fmt::format("milestone {} outside (1, {})", milestones[k], T));
        }
        if (k > 0 && milestones[k] <= milestones[k - 1]) {
          throw DomainError("milestones must be strictly increasing");
        }
      }
      break;
    case ScheduleKind::plateau:
      check_reduction_factor(alpha);
      break;
    default:
      break;
  }
}

double StepSchedule::at(int t) const {
  switch (kind) {
    case ScheduleKind::constant:
      check_inner_epoch(t, T);
      return constant_step(eta0);
    case ScheduleKind::inv_t:
      check_inner_epoch(t, T);
      return inv_t_step(t, eta0, alpha);
    case ScheduleKind::inv_sqrt_t:
      check_inner_epoch(t, T);
      return inv_sqrt_t_step(t, eta0, alpha);
    case ScheduleKind::cosine:
      return cosine_step(t, T, eta0);
    case ScheduleKind::exponential:
      check_inner_epoch(t, T);
      return exponential_step(t, T, eta0, beta);
    case ScheduleKind::logarithmic:
      return log_step(t, T, eta0);
    case ScheduleKind::stagewise:
      check_inner_epoch(t, T);
      return stagewise_step(t, eta0, alpha, milestones);
    case ScheduleKind::plateau:
      check_inner_epoch(t, T);
      return eta0;
  }
  throw DomainError("unhandled schedule kind");
}

PlateauState make_plateau_state(double eta0, int patience, double threshold) {
  check_eta0(eta0);
  if (patience < 1) throw DomainError(fmt::format("patience must be >= 1, got {}", patience));
  if (!(threshold > 0.0)) throw DomainError(fmt::format("threshold must be positive, got {}", threshold));
  PlateauState state;
  state.current_eta = eta0;
  state.patience = patience;
  state.threshold = threshold;
  return state;
}

PlateauState plateau_update(PlateauState state, double metric, double alpha) {
  if (!std::isfinite(metric)) throw InputError(fmt::format("plateau metric must be finite, got {}", metric));
  check_reduction_factor(alpha);
  if (metric < state.best_metric * (1.0 - state.threshold)) {
    state.best_metric = metric;
    state.epochs_since_improvement = 0;
    return state;
  }
  ++state.epochs_since_improvement;
  if (state.epochs_since_improvement > state.patience) {
    state.current_eta *= alpha;
    state.epochs_since_improvement = 0;
  }
  return state;
}

RestartIndex warm_restart_index(long long k, int T) {
  check_horizon(T);
  if (k < 0) throw DomainError(fmt::format("global epoch counter must be >= 0, got {}", k));
  return {static_cast<int>(k / T), static_cast<int>(k % T) + 1};
}

std::vector<double> schedule_table(const StepSchedule& schedule) {
  schedule.validate();
  std::vector<double> table(static_cast<std::size_t>(schedule.T));
  for (int t = 1; t <= schedule.T; ++t) table[static_cast<std::size_t>(t - 1)] = schedule.at(t);
  return table;
}

}  // namespace logstep
