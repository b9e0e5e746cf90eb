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

#include "logstep/bounds.hpp"

#include <cmath>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/numeric.hpp"
#include "logstep/schedules.hpp"

namespace logstep {

namespace {

void check_horizon(int T) {
  if (T < 2) throw DomainError(fmt::format("horizon T must be >= 2, got {}", T));
}

}  // namespace

void TheoremInputs::validate() const {
  if (!(c > 1.0)) throw DomainError(fmt::format("c must exceed 1, got {}", c));
  if (!(L > 0.0)) throw DomainError(fmt::format("L must be positive, got {}", L));
  if (!(sigma >= 0.0)) throw DomainError(fmt::format("sigma must be nonnegative, got {}", sigma));
  if (!(delta1 >= 0.0)) throw DomainError(fmt::format("delta1 must be nonnegative, got {}", delta1));
  if (!(delta1_max >= 0.0)) throw DomainError(fmt::format("delta1_max must be nonnegative, got {}", delta1_max));
  check_horizon(T);
  if (l < 1) throw DomainError(fmt::format("cycle count l must be >= 1, got {}", l));
}

double lemma1_ln_lower(double x) {
  if (!(x >= 1.0)) throw DomainError(fmt::format("x must be >= 1, got {}", x));
  return (x - 1.0) / x;
}

double lemma2_lower_bound(double eta0, int T) {
  check_horizon(T);
  return eta0 * (static_cast<double>(T) + 1.0) / (2.0 * std::log(static_cast<double>(T)));
}

double lemma3_upper_bound(double eta0, int T) {
  check_horizon(T);
  const double lnT = std::log(static_cast<double>(T));
  return eta0 * eta0 * 2.0 * static_cast<double>(T) / (lnT * lnT);
}

double lemma4_descent_rhs(double eta_t, double L, double sigma, double expected_decrease) {
  if (!(L > 0.0)) throw DomainError(fmt::format("L must be positive, got {}", L));
  if (!(eta_t >= 0.0)) throw DomainError(fmt::format("eta_t must be nonnegative, got {}", eta_t));
  if (eta_t > 1.0 / L) {
    throw PreconditionError(fmt::format("descent lemma needs eta_t <= 1/L = {}, got {}", 1.0 / L, eta_t));
  }
  return expected_decrease + L * eta_t * eta_t * sigma * sigma / 2.0;
}

double theorem1_bound(const TheoremInputs& in) {
  in.validate();
  const double T = in.T;
  const double lnT = std::log(T);
  return 4.0 * in.c * in.L * lnT / (T + 1.0) * in.delta1 +
         4.0 * in.sigma * in.sigma * T / (in.L * in.c * (T + 1.0) * lnT);
}

double corollary1_c(int T) {
  check_horizon(T);
  return std::sqrt(static_cast<double>(T)) / std::log(static_cast<double>(T));
}

Corollary1Result corollary1_bound(double L, double sigma, double delta1, int T) {
  check_horizon(T);
  if (!(L > 0.0)) throw DomainError(fmt::format("L must be positive, got {}", L));
  if (sigma == 0.0) {
    throw DomainError("the sqrt(T) rate needs sigma != 0; with exact gradients evaluate theorem1_bound directly");
  }
  const double rootT = std::sqrt(static_cast<double>(T));
  return {4.0 * L * delta1 / rootT + 4.0 * sigma * sigma / (L * rootT), corollary1_c(T)};
}

double corollary2_bound(const TheoremInputs& in) {
  in.validate();
  const double T = in.T;
  const double lnT = std::log(T);
  const double l = in.l;
  return 4.0 * l * in.c * in.L * lnT / T * in.delta1_max + 4.0 * in.sigma * in.sigma * l / (in.L * in.c * lnT);
}

SumBoundReport verify_sum_bounds(double eta0, int T) {
  check_horizon(T);
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (int t = 1; t <= T; ++t) {
    const double eta = log_step(t, T, eta0);
    sum.add(eta);
    sum_sq.add(eta * eta);
  }
  SumBoundReport report;
  report.eta0 = eta0;
  report.T = T;
  report.direct_sum = sum.value();
  report.direct_sum_sq = sum_sq.value();
  report.lemma2 = lemma2_lower_bound(eta0, T);
  report.lemma3 = lemma3_upper_bound(eta0, T);
  report.lower_holds = report.direct_sum >= report.lemma2;
  report.upper_holds = report.direct_sum_sq <= report.lemma3;
  return report;
}

std::optional<int> smallest_lemma2_horizon(double eta0, int max_T) {
  check_horizon(max_T);
  // sum_{t<=T} eta_t = eta0 (T - ln(T!) / ln T); ln(T!) is accumulated once so
  // the scan stays linear in max_T.
  CompensatedSum log_factorial;
  std::optional<int> first_of_run;
  for (int T = 2; T <= max_T; ++T) {
    log_factorial.add(std::log(static_cast<double>(T)));
    const double lnT = std::log(static_cast<double>(T));
    const double direct = eta0 * (static_cast<double>(T) - log_factorial.value() / lnT);
    if (direct >= lemma2_lower_bound(eta0, T)) {
      if (!first_of_run) first_of_run = T;
    } else {
      first_of_run.reset();
    }
  }
  return first_of_run;
}

}  // namespace logstep
