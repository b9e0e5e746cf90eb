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

#include "logstep/bounds.hpp"
#include "logstep/error.hpp"
#include "logstep/harness.hpp"
#include "logstep/sampling.hpp"

namespace logstep {

ProblemConstants constants_of(const ProblemBundle& bundle) {
  ProblemConstants constants;
  const auto L = bundle.problem->lipschitz();
  constants.L = L.value_or(0.0);
  constants.L_empirical = !L.has_value();
  constants.sigma = bundle.sigma;
  constants.sigma_empirical = bundle.sigma_empirical;
  constants.f_lb = bundle.problem->f_lb();
  return constants;
}

BoundReport bound_report(const RunTrace& trace, const StepSchedule& schedule, int restarts,
                         const ProblemConstants& constants) {
  if (schedule.kind != ScheduleKind::logarithmic) {
    throw PreconditionError("bound reports apply to the logarithmic schedule only");
  }
  if (trace.status != RunStatus::completed) throw PreconditionError("bound reports need a completed run");
  if (restarts < 1) throw DomainError("restarts must be >= 1");
  const int T = schedule.T;
  const auto expected = static_cast<std::size_t>(restarts) * static_cast<std::size_t>(T);
  if (trace.rows.size() != expected) {
    throw PreconditionError(fmt::format("trace has {} rows, the bound needs every one of the {} epochs",
                                        trace.rows.size(), expected));
  }
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    if (trace.rows[k].global_epoch != static_cast<long long>(k) + 1) {
      throw PreconditionError("trace rows are not dense in global_epoch");
    }
  }
  if (constants.L_empirical || !(constants.L > 0.0)) {
    throw PreconditionError("bound reports need a declared smoothness constant L");
  }

  BoundReport report;
  report.T = T;
  report.l = restarts;
  report.c = 1.0 / (schedule.eta0 * constants.L);
  if (!(report.c > 1.0)) {
    throw PreconditionError(fmt::format("eta0 = {} is not below 1/L = {}: the bound needs eta0 = 1/(cL) with c > 1",
                                        schedule.eta0, 1.0 / constants.L));
  }

  std::vector<double> etas;
  std::vector<double> grads;
  for (const auto& row : trace.rows) {
    etas.push_back(row.eta);
    grads.push_back(row.grad_norm_sq);
  }
  report.measured = weighted_grad_measure(grads, OutputDistribution::from_steps(etas));

  TheoremInputs in;
  in.c = report.c;
  in.L = constants.L;
  in.sigma = constants.sigma;
  in.T = T;
  in.l = restarts;
  if (restarts == 1) {
    in.delta1 = std::max(0.0, trace.rows.front().train_loss - constants.f_lb);
    report.delta = in.delta1;
    report.bound = theorem1_bound(in);
  } else {
    double worst = 0.0;
    for (int i = 0; i < restarts; ++i) {
      worst = std::max(worst, trace.rows[static_cast<std::size_t>(i) * T].train_loss - constants.f_lb);
    }
    in.delta1_max = worst;
    report.delta = worst;
    report.bound = corollary2_bound(in);
  }
  report.slack = report.measured > 0.0 ? report.bound / report.measured : std::numeric_limits<double>::infinity();
  if (!constants.sigma_empirical) report.satisfied = report.measured <= report.bound;
  return report;
}

BoundReport bound_report_mean(std::span<const RunTrace> traces, const StepSchedule& schedule, int restarts,
                              const ProblemConstants& constants) {
  if (traces.empty()) throw InputError("no traces to average");
  BoundReport mean;
  for (const auto& trace : traces) {
    const auto single = bound_report(trace, schedule, restarts, constants);
    mean.measured += single.measured;
    mean.bound += single.bound;
    mean.delta += single.delta;
    mean.c = single.c;
    mean.T = single.T;
    mean.l = single.l;
  }
  const double n = static_cast<double>(traces.size());
  mean.measured /= n;
  mean.bound /= n;
  mean.delta /= n;
  mean.slack = mean.measured > 0.0 ? mean.bound / mean.measured : std::numeric_limits<double>::infinity();
  if (!constants.sigma_empirical) mean.satisfied = mean.measured <= mean.bound;
  return mean;
}

}  // namespace logstep
