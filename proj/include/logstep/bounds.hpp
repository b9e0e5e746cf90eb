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

#include <optional>

namespace logstep {

/// Constants entering the convergence bounds for the logarithmic schedule.
struct TheoremInputs {
  double c = 2.0;           // eta0 = 1 / (c L), c > 1
  double L = 1.0;           // smoothness constant
  double sigma = 0.0;       // gradient-noise bound
  double delta1 = 0.0;      // f(x_1) - f* (or - f_lb)
  int T = 100;              // inner horizon
  int l = 1;                // number of restart cycles
  double delta1_max = 0.0;  // max_i f(x_1 of cycle i) - f*

  // Throws DomainError unless c > 1, L > 0, T >= 2, l >= 1, deltas >= 0, sigma >= 0.
  void validate() const;
};

/// (x - 1) / x, a lower bound on ln x for x >= 1.
double lemma1_ln_lower(double x);

/// eta0 (T + 1) / (2 ln T): lower bound on sum_t eta_t.
double lemma2_lower_bound(double eta0, int T);

/// eta0^2 * 2T / ln^2 T: upper bound on sum_t eta_t^2.
double lemma3_upper_bound(double eta0, int T);

/// Right-hand side of the one-step descent inequality,
///   (eta_t / 2) E||grad f(x_t)||^2 <= decrease + L eta_t^2 sigma^2 / 2.
/// Throws PreconditionError when eta_t > 1 / L.
double lemma4_descent_rhs(double eta_t, double L, double sigma, double expected_decrease);

/// 4 c L ln T / (T + 1) * delta1 + 4 sigma^2 T / (L c (T + 1) ln T).
double theorem1_bound(const TheoremInputs& in);

struct Corollary1Result {
  double bound = 0.0;
  double implied_c = 0.0;  // sqrt(T) / ln T
};

/// 4 L delta1 / sqrt(T) + 4 sigma^2 / (L sqrt(T)). sigma must be nonzero; for
/// sigma = 0 use theorem1_bound.
Corollary1Result corollary1_bound(double L, double sigma, double delta1, int T);

/// sqrt(T) / ln T.
double corollary1_c(int T);

/// Warm restarts with l equal cycles:
///   4 l c L ln T / T * delta1_max + 4 sigma^2 l / (L c ln T).
double corollary2_bound(const TheoremInputs& in);

struct SumBoundReport {
  double eta0 = 0.0;
  int T = 0;
  double direct_sum = 0.0;
  double direct_sum_sq = 0.0;
  double lemma2 = 0.0;
  double lemma3 = 0.0;
  bool lower_holds = false;  // direct_sum >= lemma2
  bool upper_holds = false;  // direct_sum_sq <= lemma3
};

/// Sums the logarithmic schedule directly (compensated) and compares the
/// sums with the closed-form bounds.
SumBoundReport verify_sum_bounds(double eta0, int T);

/// Smallest T in [2, max_T] from which the lower sum bound holds for every
/// larger T up to max_T. Returns nullopt if it fails at max_T.
std::optional<int> smallest_lemma2_horizon(double eta0, int max_T);

}  // namespace logstep
