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

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "logstep/error.hpp"
#include "logstep/sampling.hpp"

using namespace logstep;

namespace {

StepSchedule make(ScheduleKind kind, int T, double eta0 = 1.0) {
  StepSchedule s{kind, eta0, T};
  s.alpha = kind == ScheduleKind::stagewise ? 0.1 : 0.01;
  s.beta = 1.0;
  if (kind == ScheduleKind::stagewise && T >= 3) s.milestones = default_milestones(T, 1);
  return s;
}

// Plain normalization loop, kept separate from the library code path.
std::vector<double> normalized(const std::vector<double>& raw) {
  double total = 0.0;
  for (double v : raw) total += v;
  std::vector<double> out;
  for (double v : raw) out.push_back(v / total);
  return out;
}

}  // namespace

TEST_CASE("build_distribution examples") {
  const auto uniform = build_distribution(make(ScheduleKind::constant, 4));
  for (int t = 1; t <= 4; ++t) CHECK(uniform.prob(t) == 0.25);
  const auto two = build_distribution(make(ScheduleKind::logarithmic, 2));
  CHECK(two.prob(1) == 1.0);
  CHECK(two.prob(2) == 0.0);
  CHECK_THROWS_AS(OutputDistribution::from_steps(std::vector<double>{0.0, 0.0}), DegenerateDistributionError);
  CHECK_THROWS_AS(OutputDistribution::from_steps(std::vector<double>{1.0, -0.5}), InputError);
}

TEST_CASE("first-epoch probabilities match the direct normalization") {
  const auto log100 = build_distribution(make(ScheduleKind::logarithmic, 100));
  const auto cos100 = build_distribution(make(ScheduleKind::cosine, 100));
  CHECK(log100.prob(1) == doctest::Approx(0.047585062429452271).epsilon(1e-13));
  CHECK(cos100.prob(1) == doctest::Approx(0.020197035963290218).epsilon(1e-13));
  const auto log1000 = build_distribution(make(ScheduleKind::logarithmic, 1000));
  const auto cos1000 = build_distribution(make(ScheduleKind::cosine, 1000));
  CHECK(log1000.prob(1) == doctest::Approx(0.006938094870614611).epsilon(1e-13));
  CHECK(cos1000.prob(1) == doctest::Approx(0.002001997062264122).epsilon(1e-13));

  std::vector<double> raw;
  for (int t = 1; t <= 100; ++t) raw.push_back(log_step(t, 100, 1.0));
  const auto direct = normalized(raw);
  for (int t = 1; t <= 100; ++t) CHECK(log100.prob(t) == doctest::Approx(direct[t - 1]).epsilon(1e-14));
}

TEST_CASE("probabilities sum to one and follow the step ratios") {
  for (int T : {2, 10, 100, 1000}) {
    for (auto kind : {ScheduleKind::constant, ScheduleKind::inv_t, ScheduleKind::inv_sqrt_t, ScheduleKind::cosine,
                      ScheduleKind::exponential, ScheduleKind::logarithmic, ScheduleKind::stagewise}) {
      const auto s = make(kind, T);
      const auto dist = build_distribution(s);
      double total = 0.0;
      for (double p : dist.probs()) total += p;
      CHECK(std::abs(total - 1.0) <= 1e-12);
      CHECK(tail_mass(dist, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
      const auto table = schedule_table(s);
      for (int t = 2; t <= T; ++t) {
        CHECK(dist.prob(t) * table[0] == doctest::Approx(dist.prob(1) * table[t - 1]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sample_iterate") {
  std::vector<double> point(10, 0.0);
  point.back() = 1.0;
  const auto mass = OutputDistribution::from_steps(point);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) CHECK(sample_iterate(mass, rng) == 10);

  const auto log100 = build_distribution(make(ScheduleKind::logarithmic, 100));
  std::mt19937_64 a(12345), b(12345);
  for (int k = 0; k < 100; ++k) CHECK(sample_iterate(log100, a) == sample_iterate(log100, b));
  std::mt19937_64 c(99);
  int hits_last = 0;
  for (int k = 0; k < 100000; ++k) hits_last += sample_iterate(log100, c) == 100 ? 1 : 0;
  CHECK(hits_last == 0);
}

TEST_CASE("uniform sampling frequencies") {
  const int T = 20;
  const int n = 100000;
  const auto dist = build_distribution(make(ScheduleKind::constant, T));
  std::mt19937_64 rng(2024);
  std::vector<int> counts(T + 1, 0);
  for (int k = 0; k < n; ++k) ++counts[sample_iterate(dist, rng)];
  const double p = 1.0 / T;
  const double se = std::sqrt(p * (1 - p) / n);
  for (int t = 1; t <= T; ++t) CHECK(std::abs(counts[t] / double(n) - p) <= 3 * se);
}

TEST_CASE("logarithmic sampling frequencies over a million draws") {
  const int T = 50;
  const int n = 1000000;
  const auto dist = build_distribution(make(ScheduleKind::logarithmic, T));
  std::mt19937_64 rng(31337);
  std::vector<int> counts(T + 1, 0);
  for (int k = 0; k < n; ++k) ++counts[sample_iterate(dist, rng)];
  for (int t = 1; t <= T; ++t) {
    const double p = dist.prob(t);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(counts[t] / double(n) - p) <= 4 * se + 1e-15);
  }
}

TEST_CASE("tail_mass") {
  const auto uniform = build_distribution(make(ScheduleKind::constant, 100));
  CHECK(tail_mass(uniform, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(tail_mass(uniform, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(tail_mass(uniform, 0.0), DomainError);
  CHECK_THROWS_AS(tail_mass(uniform, 1.5), DomainError);

  const auto log100 = build_distribution(make(ScheduleKind::logarithmic, 100));
  const auto cos100 = build_distribution(make(ScheduleKind::cosine, 100));
  CHECK(tail_mass(log100, 0.25) == doctest::Approx(0.033895031958942995).epsilon(1e-12));
  CHECK(tail_mass(cos100, 0.25) == doctest::Approx(0.023712088064056665).epsilon(1e-12));
  const auto log1000 = build_distribution(make(ScheduleKind::logarithmic, 1000));
  const auto cos1000 = build_distribution(make(ScheduleKind::cosine, 1000));
  CHECK(tail_mass(log1000, 0.25) == doctest::Approx(0.034244379633495876).epsilon(1e-12));
  CHECK(tail_mass(cos1000, 0.25) == doctest::Approx(0.024799458930400031).epsilon(1e-12));
}

TEST_CASE("late epochs favor the logarithmic schedule") {
  for (int T : {100, 1000}) {
    const auto lg = build_distribution(make(ScheduleKind::logarithmic, T));
    const auto cs = build_distribution(make(ScheduleKind::cosine, T));
    const int first = T - T / 20 + 1;
    for (int t = first; t < T; ++t) CHECK(lg.prob(t) > cs.prob(t));
    // Both steps vanish at t = T.
    CHECK(lg.prob(T) == 0.0);
    CHECK(cs.prob(T) == 0.0);
    CHECK(tail_mass(lg, 0.25) > tail_mass(cs, 0.25));
  }
}

TEST_CASE("weighted_grad_measure") {
  const auto dist = OutputDistribution::from_steps(std::vector<double>{0.5, 0.3, 0.2});
  CHECK(weighted_grad_measure(std::vector<double>{1, 2, 3}, dist) == doctest::Approx(1.7).epsilon(1e-15));
  const auto log100 = build_distribution(make(ScheduleKind::logarithmic, 100));
  CHECK(weighted_grad_measure(std::vector<double>(100, 4.5), log100) == doctest::Approx(4.5).epsilon(1e-14));
  std::vector<double> point(5, 0.0);
  point[4] = 1.0;
  CHECK(weighted_grad_measure(std::vector<double>{1, 2, 3, 4, 9}, OutputDistribution::from_steps(point)) == 9.0);
  CHECK_THROWS_AS(weighted_grad_measure(std::vector<double>{1, 2}, dist), InputError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<double> steps(40), trace(40), scaled(40);
  for (int k = 0; k < 40; ++k) {
    steps[k] = u(rng);
    trace[k] = u(rng);
    scaled[k] = 1024.0 * steps[k];
  }
  CHECK(weighted_grad_measure(trace, OutputDistribution::from_steps(steps)) ==
        doctest::Approx(weighted_grad_measure(trace, OutputDistribution::from_steps(scaled))).epsilon(1e-14));
}

TEST_CASE("compare_distributions") {
  const std::vector<StepSchedule> schedules = {make(ScheduleKind::logarithmic, 100), make(ScheduleKind::cosine, 100)};
  const auto cmp = compare_distributions(schedules);
  CHECK(cmp.T == 100);
  REQUIRE(cmp.columns.size() == 2);
  CHECK(cmp.columns[0][0] == build_distribution(schedules[0]).prob(1));
  const std::vector<StepSchedule> mismatched = {make(ScheduleKind::logarithmic, 100), make(ScheduleKind::cosine, 50)};
  CHECK_THROWS_AS(compare_distributions(mismatched), InputError);
}
