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
#include <string>
#include <string_view>
#include <vector>

#include "logstep/problems.hpp"
#include "logstep/schedules.hpp"
#include "logstep/trace.hpp"

namespace logstep {

enum class Method { sgd, sgd_armijo, adam };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct ArmijoParams {
  double c_armijo = 0.1;
  double backtrack = 0.5;
  int max_backtracks = 50;
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct RunConfig {
  StepSchedule schedule;         // schedule.T is the number of epochs per cycle
  int restarts = 1;              // l
  int batches_per_epoch = 0;     // 0: ceil(n / batch) for finite sums, 1 otherwise
  double mu = 0.9;               // Nesterov momentum
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  Method method = Method::sgd;
  ArmijoParams armijo;           // eta_max is the schedule's step
  AdamParams adam;
  bool reset_momentum = false;   // zero the momentum buffer at each restart
  int plateau_patience = 10;
  double plateau_threshold = 1e-4;
  bool log_armijo = false;
  std::string label;

  // Throws DomainError on invalid fields.
  void validate() const;
};

struct OptimizerState {
  Vector x;
  Vector velocity;
  int cycle = 0;
  int inner_t = 1;
  double mu = 0.0;

  static OptimizerState start(const Vector& x0, double mu);
};

/// mu = 0: x <- x - eta g. Otherwise Nesterov: v <- mu v + g,
/// x <- x - eta (g + mu v). Throws RunFailure on non-finite input or result.
void sgd_step(OptimizerState& state, const Vector& g, double eta);

/// Backtracks eta_max * backtrack^k until
///   f_i(x - eta g) <= f_i(x) - c eta ||g||^2
/// on the sampled component that produced g. After max_backtracks failures the
/// smallest trial is returned with accepted = false.
ArmijoResult armijo_search(const StochasticOracle& oracle, const OracleDraw& draw, const Vector& x, const Vector& g,
                           double eta_max, const ArmijoParams& params);

struct AdamState {
  Vector m;
  Vector v;
  long long step = 0;

  static AdamState zeros(Eigen::Index dim);
};

/// Bias-corrected Adam update of state.x.
void adam_step(OptimizerState& state, AdamState& moments, const Vector& g, double eta, const AdamParams& params);

/// Divergence threshold on f.
inline constexpr double kDivergenceLimit = 1e12;

int effective_batches_per_epoch(const ProblemBundle& bundle, const RunConfig& config);

/// Warm-restart loop: `restarts` cycles of T epochs; every epoch sets eta_t
/// from the schedule and performs batches_per_epoch oracle steps. Divergence
/// truncates the trace and marks it, it does not throw.
RunTrace run(const ProblemBundle& bundle, const RunConfig& config, std::uint64_t seed);

struct GridEntry {
  double eta0 = 0.0;
  int stage = 1;
  double mean_val = 0.0;  // +inf when any seed diverged
  int diverged = 0;
  std::vector<double> per_seed;
};

struct GridResult {
  double best_eta0 = 0.0;
  std::vector<GridEntry> table;  // evaluation order
  std::vector<GridEntry> ranked() const;
};

/// {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2, ..., 1}.
std::vector<double> default_coarse_grid();

/// Two-stage search on the mean final validation metric over config.seeds.
/// Stage two scans winner +/- k * fine_step up to fine_radius. Throws
/// NoWinnerError when every point diverged.
GridResult grid_search(const ProblemBundle& bundle, const RunConfig& config_template, std::span<const double> coarse,
                       double fine_radius, double fine_step);

}  // namespace logstep
