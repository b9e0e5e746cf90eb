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

#include "doctest.h"
#include "logstep/bounds.hpp"
#include "logstep/error.hpp"
#include "logstep/numeric.hpp"
#include "logstep/problems.hpp"
#include "logstep/schedules.hpp"

using namespace logstep;

TEST_CASE("lemma1 examples and sweep") {
  CHECK(lemma1_ln_lower(1.0) == 0.0);
  CHECK(lemma1_ln_lower(std::exp(1.0)) == doctest::Approx((std::exp(1.0) - 1) / std::exp(1.0)));
  CHECK_THROWS_AS(lemma1_ln_lower(0.5), DomainError);
  int violations = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const double x = std::pow(10.0, 6.0 * k / (n - 1));
    if (!(std::log(x) >= lemma1_ln_lower(x))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("lemma2 and lemma3 closed forms") {
  CHECK(lemma2_lower_bound(1.0, 100) == doctest::Approx(10.965935668057108648).epsilon(1e-14));
  CHECK(lemma2_lower_bound(1.0, 2) == doctest::Approx(3.0 / (2.0 * std::log(2.0))).epsilon(1e-15));
  CHECK(lemma2_lower_bound(2.0, 100) == 2.0 * lemma2_lower_bound(1.0, 100));
  CHECK(lemma3_upper_bound(1.0, 100) == doctest::Approx(9.4305848505806964610).epsilon(1e-14));
  CHECK(lemma3_upper_bound(1.0, 10000) == doctest::Approx(235.76462126451741152).epsilon(1e-14));
  CHECK(lemma3_upper_bound(2.0, 100) == doctest::Approx(4.0 * lemma3_upper_bound(1.0, 100)).epsilon(1e-15));
  CHECK_THROWS_AS(lemma2_lower_bound(1.0, 1), DomainError);
  CHECK_THROWS_AS(lemma3_upper_bound(1.0, 1), DomainError);
}

TEST_CASE("verify_sum_bounds") {
  const auto r = verify_sum_bounds(1.0, 100);
  CHECK(r.direct_sum == doctest::Approx(21.014998172642105813).epsilon(1e-14));
  CHECK(r.direct_sum_sq == doctest::Approx(8.4368893428047829933).epsilon(1e-14));
  CHECK(r.lower_holds);
  CHECK(r.upper_holds);
  const auto big = verify_sum_bounds(0.25, 100000);
  CHECK(big.lower_holds);
  CHECK(big.upper_holds);
  const auto small = verify_sum_bounds(1.0, 3);
  CHECK(small.direct_sum == doctest::Approx(1.0 + (1.0 - std::log(2.0) / std::log(3.0))));
  CHECK_FALSE(small.lower_holds);
  CHECK_FALSE(verify_sum_bounds(1.0, 2).lower_holds);
}

TEST_CASE("smallest horizon for the step-sum lower bound") {
  CHECK(smallest_lemma2_horizon(1.0, 1000) == 5);
  CHECK(smallest_lemma2_horizon(0.05, 1000) == 5);
  for (int T = 5; T <= 3000; ++T) {
    const auto r = verify_sum_bounds(0.7, T);
    REQUIRE(r.lower_holds);
    REQUIRE(r.upper_holds);
  }
  for (int T : {2, 3, 4}) CHECK_FALSE(verify_sum_bounds(0.7, T).lower_holds);
}

TEST_CASE("lemma4 descent on exact gradient descent") {
  CHECK_THROWS_AS(lemma4_descent_rhs(0.6, 2.0, 0.0, 0.0), PreconditionError);
  CHECK(lemma4_descent_rhs(0.0, 2.0, 1.0, 0.0) == 0.0);
  for (double L : {0.5, 1.0, 4.0}) {
    for (double c : {1.0, 1.5, 4.0}) {
      const double eta = 1.0 / (c * L);
      double x = 3.0;
      for (int k = 0; k < 20; ++k) {
        const double g = L * x;
        const double next = x - eta * g;
        const double decrease = L * x * x / 2 - L * next * next / 2;
        CHECK(eta / 2 * g * g <= lemma4_descent_rhs(eta, L, 0.0, decrease) * (1 + 1e-14));
        x = next;
      }
    }
  }
}

TEST_CASE("lemma4 descent with gaussian noise") {
  const double sigma = 1.0;
  auto bundle = make_noisy_quadratic(10, 1.0, 10.0, sigma, 3);
  const auto& f = *bundle.problem;
  const double L = *f.lipschitz();
  const double eta = 1.0 / (2.0 * L);
  auto oracle = bundle.make_oracle(17);
  const Vector x = f.x_init();
  const Vector g = f.gradient(x);
  const double lhs = eta / 2 * g.squaredNorm();
  const int reps = 1000;
  double mean = 0.0, m2 = 0.0;
  for (int r = 1; r <= reps; ++r) {
    const Vector next = x - eta * oracle.sample_gradient(x);
    const double rhs = lemma4_descent_rhs(eta, L, sigma, f.value(x) - f.value(next));
    const double delta = rhs - mean;
    mean += delta / r;
    m2 += delta * (rhs - mean);
  }
  const double se = std::sqrt(m2 / (reps - 1) / reps);
  CHECK(lhs <= mean + 3 * se);
}

TEST_CASE("theorem1 bound") {
  TheoremInputs in{2.0, 1.0, 1.0, 1.0, 100};
  CHECK(theorem1_bound(in) == doctest::Approx(0.79476049186366251197).epsilon(1e-14));
  TheoremInputs quiet = in;
  quiet.sigma = 0.0;
  CHECK(theorem1_bound(quiet) == doctest::Approx(8.0 * std::log(100.0) / 101.0).epsilon(1e-15));
  quiet.delta1 = 0.0;
  CHECK(theorem1_bound(quiet) == 0.0);
  TheoremInputs bad = in;
  bad.c = 1.0;
  CHECK_THROWS_AS(theorem1_bound(bad), DomainError);
  bad = in;
  bad.T = 1;
  CHECK_THROWS_AS(theorem1_bound(bad), DomainError);
}

TEST_CASE("theorem1 monotonicity") {
  for (double c : {1.5, 3.0, 10.0}) {
    for (int T = 10; T <= 100000; T *= 10) {
      double prev = -1.0;
      for (double delta : {0.0, 0.1, 1.0, 10.0}) {
        const double v = theorem1_bound({c, 2.0, 0.5, delta, T});
        CHECK(v > prev);
        prev = v;
      }
      prev = -1.0;
      for (double sigma : {0.0, 0.1, 1.0, 10.0}) {
        const double v = theorem1_bound({c, 2.0, sigma, 1.0, T});
        CHECK(v > prev);
        prev = v;
      }
    }
    double prev = std::numeric_limits<double>::infinity();
    for (int T = 5; T <= 100000; T = T * 3 / 2) {
      const double v = theorem1_bound({c, 2.0, 0.5, 1.0, T});
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("corollary1") {
  const auto r = corollary1_bound(1.0, 1.0, 1.0, 10000);
  CHECK(r.bound == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(r.implied_c == doctest::Approx(10.857362047581295691).epsilon(1e-14));
  CHECK(corollary1_c(10000) == r.implied_c);
  CHECK(corollary1_bound(1.0, 1.0, 1.0, 40000).bound == doctest::Approx(r.bound / 2).epsilon(1e-15));
  CHECK_THROWS_AS(corollary1_bound(1.0, 0.0, 1.0, 100), DomainError);
  for (int T : {100, 10000, 1000000}) {
    const double c = corollary1_c(T);
    const double ratio = theorem1_bound({c, 1.0, 1.0, 1.0, T}) / corollary1_bound(1.0, 1.0, 1.0, T).bound;
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }
}

TEST_CASE("corollary2") {
  TheoremInputs in{2.0, 1.0, 1.0, 0.0, 100, 3, 1.0};
  CHECK(corollary2_bound(in) == doctest::Approx(2.4081242903468974113).epsilon(1e-14));
  TheoremInputs doubled = in;
  doubled.l = 6;
  CHECK(corollary2_bound(doubled) == doctest::Approx(2 * corollary2_bound(in)).epsilon(1e-15));
  TheoremInputs single = in;
  single.l = 1;
  const double expected = 4 * 2.0 * std::log(100.0) / 100.0 + 4.0 / (2.0 * std::log(100.0));
  CHECK(corollary2_bound(single) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("compensated summation") {
  CompensatedSum sum;
  sum.add(1.0);
  for (int k = 0; k < 1000; ++k) sum.add(1e-16);
  sum.add(-1.0);
  CHECK(sum.value() == doctest::Approx(1e-13).epsilon(1e-10));
}
