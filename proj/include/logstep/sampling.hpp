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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "logstep/schedules.hpp"

namespace logstep {

/// Law of the reported iterate: P[t] = eta_t / sum(eta). Immutable once built.
class OutputDistribution {
 public:
  /// Normalizes a raw step-size vector. Throws DegenerateDistributionError if
  /// every step is zero and InputError on negative or non-finite entries.
  static OutputDistribution from_steps(std::span<const double> steps);

  int horizon() const { return static_cast<int>(probs_.size()); }
  // probs()[t - 1] is the probability of epoch t.
  std::span<const double> probs() const { return probs_; }
  double prob(int t) const { return probs_.at(static_cast<std::size_t>(t - 1)); }
  std::span<const double> cumulative() const { return cdf_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

OutputDistribution build_distribution(const StepSchedule& schedule);

/// Inverse-CDF draw returning an epoch index in [1, T]. Zero-probability
/// epochs are never returned.
int sample_iterate(const OutputDistribution& dist, std::mt19937_64& rng);

/// Probability mass on epochs t > ceil((1 - fraction) * T).
double tail_mass(const OutputDistribution& dist, double fraction);

/// sum_t p_t * grad_sq[t - 1], the quantity bounded by the convergence theorem.
double weighted_grad_measure(std::span<const double> grad_sq, const OutputDistribution& dist);

struct DistributionComparison {
  std::vector<std::string> labels;
  // columns[k][t - 1] is the probability of epoch t under schedule k.
  std::vector<std::vector<double>> columns;
  int T = 0;
};

DistributionComparison compare_distributions(std::span<const StepSchedule> schedules);

}  // namespace logstep
