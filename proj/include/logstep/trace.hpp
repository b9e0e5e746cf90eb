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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace logstep {

/// Metrics at the iterate x_t that epoch t starts from, plus the step size
/// applied during that epoch.
struct TraceRow {
  std::uint64_t seed = 0;
  long long global_epoch = 0;  // 1-based, dense
  int cycle = 0;
  int t = 1;
  double eta = 0.0;
  double train_loss = 0.0;
  double grad_norm_sq = 0.0;
  double val_metric = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

enum class RunStatus { completed, diverged };

/// Line-search record for one accepted (or exhausted) Armijo search.
struct ArmijoResult {
  double eta = 0.0;
  double f_x = 0.0;      // f_i(x)
  double f_trial = 0.0;  // f_i(x - eta g_i)
  double grad_sq = 0.0;  // ||g_i||^2
  double c_armijo = 0.0;
  int trials = 0;
  bool accepted = false;
};

struct RunTrace {
  std::string fingerprint;
  std::string label;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::completed;
  std::string failure;

  // Output iterate drawn with P[t] proportional to eta_t: global epoch over
  // the whole run (0 when undefined) and inner epoch per cycle.
  long long sampled_epoch = 0;
  std::vector<int> sampled_per_cycle;

  // Evaluated at the iterate after the last epoch.
  double final_train_loss = 0.0;
  double final_val_metric = 0.0;
  std::optional<double> final_accuracy;

  std::vector<ArmijoResult> armijo_log;
};

std::string_view to_string(RunStatus status);

}  // namespace logstep
