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

#pragma once

#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace logstep {

enum class ScheduleKind {
  constant,
  inv_t,
  inv_sqrt_t,
  cosine,
  exponential,
  logarithmic,
  stagewise,
  plateau,
};

std::string_view to_string(ScheduleKind kind);
// Throws DomainError for unknown names.
ScheduleKind parse_schedule_kind(std::string_view name);

// Pointwise step-size rules. Epochs are 1-indexed within a cycle of length T.

/// eta0 * (1 - ln t / ln T) for t in [1, T]. Exactly eta0 at t = 1 and exactly
/// 0 at t = T.
double log_step(int t, int T, double eta0);

/// eta0 / 2 * (1 + cos(pi t / T)) for t in [1, T].
double cosine_step(int t, int T, double eta0);

double constant_step(double eta0);
double inv_t_step(int t, double eta0, double alpha);
double inv_sqrt_t_step(int t, double eta0, double alpha);

/// eta0 * (beta / T)^(t / T). Requires 0 < beta < T. t = 0 is accepted and
/// yields eta0; runs never ask for it.
double exponential_step(int t, int T, double eta0, double beta);

/// eta0 * alpha^k where k counts the milestones <= t.
double stagewise_step(int t, double eta0, double alpha, std::span<const int> milestones);

/// {ceil(T/2)} for one milestone, {ceil(T/3), ceil(2T/3)} for two.
std::vector<int> default_milestones(int T, int count);

struct StepSchedule {
  ScheduleKind kind = ScheduleKind::logarithmic;
  double eta0 = 0.1;
  int T = 100;
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<int> milestones;

  // Throws DomainError when a field violates the schedule invariants.
  void validate() const;

  // Step size for inner epoch t in [1, T]. For plateau this is the base rate
  // eta0; the reduced rate lives in PlateauState.
  double at(int t) const;
};

/// Reduce-on-plateau bookkeeping. Improvement means
/// metric < best_metric * (1 - threshold) (strict).
struct PlateauState {
  double current_eta = 0.1;
  double best_metric = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  int patience = 10;
  double threshold = 1e-4;
};

PlateauState make_plateau_state(double eta0, int patience = 10, double threshold = 1e-4);

/// Returns the state after observing `metric`. When the non-improvement
/// counter exceeds patience the rate is multiplied by alpha and the counter
/// resets. Throws InputError on a non-finite metric.
PlateauState plateau_update(PlateauState state, double metric, double alpha);

struct RestartIndex {
  int cycle = 0;  // i
  int t = 1;      // inner epoch in [1, T]

  friend bool operator==(const RestartIndex&, const RestartIndex&) = default;
};

/// Maps a 0-based global epoch counter k onto (cycle, inner epoch).
RestartIndex warm_restart_index(long long k, int T);

/// [eta_1, ..., eta_T] for the schedule's own horizon.
std::vector<double> schedule_table(const StepSchedule& schedule);

}  // namespace logstep
