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
#include <limits>
#include <memory>
#include <random>

#include "doctest.h"
#include "logstep/error.hpp"
#include "logstep/optimizer.hpp"

using namespace logstep;

namespace {

RunConfig config_for(ScheduleKind kind, double eta0, int T, int restarts = 1, double mu = 0.0) {
  RunConfig config;
  config.schedule = {kind, eta0, T};
  config.restarts = restarts;
  config.mu = mu;
  config.seeds = {1};
  config.label = "test";
  return config;
}

ProblemBundle scalar_quadratic(double curvature, double x0, double sigma = 0.0) {
  return make_diagonal_quadratic(Vector::Constant(1, curvature), Vector::Constant(1, x0), sigma, 0);
}

}  // namespace

TEST_CASE("plain and Nesterov steps") {
  auto state = OptimizerState::start(Vector::Constant(1, 2.0), 0.0);
  sgd_step(state, Vector::Constant(1, 1.0), 0.5);
  CHECK(state.x[0] == 1.5);
  sgd_step(state, Vector::Constant(1, 7.0), 0.0);
  CHECK(state.x[0] == 1.5);

  auto nesterov = OptimizerState::start(Vector::Zero(1), 0.9);
  const Vector g = Vector::Ones(1);
  sgd_step(nesterov, g, 0.1);
  CHECK(nesterov.x[0] == doctest::Approx(-0.19).epsilon(1e-15));
  sgd_step(nesterov, g, 0.1);
  CHECK(nesterov.x[0] == doctest::Approx(-0.461).epsilon(1e-15));

  // Three-line reference recursion over a longer stream.
  auto stream = OptimizerState::start(Vector::Constant(1, 1.0), 0.9);
  double x = 1.0, v = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double gk = std::sin(k) + 0.3 * x;
    v = 0.9 * v + gk;
    x -= 0.05 * (gk + 0.9 * v);
    sgd_step(stream, Vector::Constant(1, gk), 0.05);
  }
  CHECK(stream.x[0] == doctest::Approx(x).epsilon(1e-13));

  auto broken = OptimizerState::start(Vector::Zero(2), 0.0);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sgd_step(broken, bad, 0.1), RunFailure);
  CHECK_THROWS_AS(sgd_step(broken, Vector::Ones(2), -0.1), RunFailure);
}

TEST_CASE("Armijo backtracking on x^2/2") {
  const auto bundle = scalar_quadratic(1.0, 1.0);
  auto oracle = bundle.make_oracle(0);
  const auto draw = oracle.draw();
  const Vector x = Vector::Ones(1);
  const Vector g = Vector::Ones(1);

  const auto easy = armijo_search(oracle, draw, x, g, 1.0, {0.1, 0.5, 50});
  CHECK(easy.accepted);
  CHECK(easy.eta == 1.0);
  CHECK(easy.trials == 1);

  const auto flat = armijo_search(oracle, draw, x, Vector::Zero(1), 0.7, {0.1, 0.5, 50});
  CHECK(flat.accepted);
  CHECK(flat.eta == 0.7);

  const auto strict = armijo_search(oracle, draw, x, g, 1.0, {0.9, 0.5, 50});
  CHECK(strict.accepted);
  CHECK(strict.eta == 0.125);
  CHECK(strict.eta <= 2 * (1 - 0.9));
  CHECK(strict.f_trial <= strict.f_x - 0.9 * strict.eta * strict.grad_sq);

  const auto exhausted = armijo_search(oracle, draw, x, g, 1.0, {0.9, 0.5, 2});
  CHECK_FALSE(exhausted.accepted);
  CHECK(exhausted.eta == 0.25);
  CHECK(exhausted.trials == 3);

  CHECK_THROWS_AS(armijo_search(oracle, draw, x, g, 0.0, {0.1, 0.5, 50}), DomainError);
  CHECK_THROWS_AS(armijo_search(oracle, draw, x, g, 1.0, {1.0, 0.5, 50}), DomainError);
  CHECK_THROWS_AS(armijo_search(oracle, draw, x, g, 1.0, {0.1, 1.0, 50}), DomainError);
}

TEST_CASE("Adam matches an unrolled reference") {
  const AdamParams params;
  SUBCASE("first step") {
    auto state = OptimizerState::start(Vector::Zero(2), 0.0);
    auto moments = AdamState::zeros(2);
    Vector g(2);
    g << 0.3, -2.0;
    adam_step(state, moments, g, 0.01, params);
    CHECK(state.x[0] == doctest::Approx(-0.01 * 0.3 / (0.3 + 1e-8)).epsilon(1e-14));
    CHECK(state.x[1] == doctest::Approx(0.01 * 2.0 / (2.0 + 1e-8)).epsilon(1e-14));
  }
  SUBCASE("zero gradients") {
    auto state = OptimizerState::start(Vector::Constant(3, 1.5), 0.0);
    auto moments = AdamState::zeros(3);
    for (int k = 0; k < 20; ++k) adam_step(state, moments, Vector::Zero(3), 0.1, params);
    CHECK(state.x == Vector::Constant(3, 1.5));
  }
  SUBCASE("hundred steps") {
    auto state = OptimizerState::start(Vector::Zero(3), 0.0);
    auto moments = AdamState::zeros(3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    double x[3] = {0, 0, 0}, m[3] = {0, 0, 0}, v[3] = {0, 0, 0};
    double b1t = 1.0, b2t = 1.0;
    for (int k = 0; k < 100; ++k) {
      Vector g(3);
      for (int i = 0; i < 3; ++i) g[i] = n(rng) + 0.1 * x[i];
      b1t *= params.beta1;
      b2t *= params.beta2;
      for (int i = 0; i < 3; ++i) {
        m[i] = params.beta1 * m[i] + (1 - params.beta1) * g[i];
        v[i] = params.beta2 * v[i] + (1 - params.beta2) * g[i] * g[i];
        x[i] -= 0.001 * (m[i] / (1 - b1t)) / (std::sqrt(v[i] / (1 - b2t)) + params.eps);
      }
      adam_step(state, moments, g, 0.001, params);
    }
    for (int i = 0; i < 3; ++i) CHECK(std::abs(state.x[i] - x[i]) <= 1e-12);
  }
}

TEST_CASE("exact gradient descent contracts geometrically") {
  const double eta = 0.05;
  for (double lambda : {0.5, 2.0, 10.0, 30.0}) {
    const auto bundle = scalar_quadratic(lambda, 2.0);
    const auto trace = run(bundle, config_for(ScheduleKind::constant, eta, 60), 1);
    REQUIRE(trace.status == RunStatus::completed);
    for (const auto& row : trace.rows) {
      const double expected = 2.0 * std::pow(1.0 - eta * lambda, static_cast<double>(row.global_epoch - 1));
      CHECK(row.train_loss == doctest::Approx(lambda * expected * expected / 2).epsilon(1e-10));
    }
  }
  const Vector diag = Vector::LinSpaced(5, 1.0, 9.0);
  auto state = OptimizerState::start(Vector::Ones(5), 0.0);
  for (int k = 1; k <= 40; ++k) {
    sgd_step(state, diag.cwiseProduct(state.x), 0.1);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::abs(state.x[i] - std::pow(1.0 - 0.1 * diag[i], k)) <= 1e-10);
    }
  }
}

TEST_CASE("constant steps below 2/L strictly decrease a noise-free quadratic") {
  const auto bundle = make_noisy_quadratic(10, 1.0, 10.0, 0.0, 0);
  const auto trace = run(bundle, config_for(ScheduleKind::constant, 0.19, 50), 1);
  REQUIRE(trace.rows.size() == 50);
  for (std::size_t k = 1; k < trace.rows.size(); ++k) CHECK(trace.rows[k].train_loss < trace.rows[k - 1].train_loss);
  CHECK(trace.final_train_loss < trace.rows.back().train_loss);
}

TEST_CASE("scale coherence") {
  const Vector diag = Vector::LinSpaced(4, 0.5, 3.0);
  const double s = 8.0;
  const auto base = make_diagonal_quadratic(diag, Vector::Ones(4), 0.0, 0);
  const auto scaled = make_diagonal_quadratic(s * diag, Vector::Ones(4), 0.0, 0);
  const auto a = run(base, config_for(ScheduleKind::logarithmic, 0.3, 40, 1, 0.9), 1);
  const auto b = run(scaled, config_for(ScheduleKind::logarithmic, 0.3 / s, 40, 1, 0.9), 1);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(b.rows[k].train_loss / s == doctest::Approx(a.rows[k].train_loss).epsilon(1e-10));
  }
  auto x = OptimizerState::start(Vector::Ones(4), 0.9);
  auto y = OptimizerState::start(Vector::Ones(4), 0.9);
  for (int k = 0; k < 100; ++k) {
    sgd_step(x, diag.cwiseProduct(x.x), 0.2);
    sgd_step(y, (s * diag).cwiseProduct(y.x), 0.2 / s);
    CHECK((x.x - y.x).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("warm restarts") {
  const auto bundle = make_noisy_quadratic(10, 1.0, 10.0, 1.0, 0);
  const int T = 30;
  const double eta0 = 0.02;
  const auto trace = run(bundle, config_for(ScheduleKind::logarithmic, eta0, T, 3, 0.9), 4);
  REQUIRE(trace.rows.size() == 90);
  const auto table = schedule_table({ScheduleKind::logarithmic, eta0, T});
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const auto& row = trace.rows[k];
    CHECK(row.global_epoch == static_cast<long long>(k) + 1);
    CHECK(row.cycle == static_cast<int>(k) / T);
    CHECK(row.t == static_cast<int>(k) % T + 1);
    CHECK(row.eta == table[static_cast<std::size_t>(row.t - 1)]);
  }
  for (int cycle = 1; cycle < 3; ++cycle) {
    const auto& start = trace.rows[static_cast<std::size_t>(cycle * T)];
    const auto& last = trace.rows[static_cast<std::size_t>(cycle * T - 1)];
    CHECK(start.eta == eta0);
    // The final epoch of a cycle has a zero step, so the next cycle starts at the same iterate.
    CHECK(last.eta == 0.0);
    CHECK(start.train_loss == last.train_loss);
    CHECK(start.grad_norm_sq == last.grad_norm_sq);
  }
  REQUIRE(trace.sampled_per_cycle.size() == 3);
  for (int t : trace.sampled_per_cycle) {
    CHECK(t >= 1);
    CHECK(t < T);
  }
  CHECK(trace.sampled_epoch >= 1);
  CHECK(trace.rows[static_cast<std::size_t>(trace.sampled_epoch - 1)].eta > 0.0);

  auto reset = config_for(ScheduleKind::constant, eta0, T, 2, 0.9);
  reset.reset_momentum = true;
  const auto carried = run(bundle, config_for(ScheduleKind::constant, eta0, T, 2, 0.9), 4);
  const auto restarted = run(bundle, reset, 4);
  CHECK(carried.rows[T] == restarted.rows[T]);
  CHECK(carried.rows[T + 1].train_loss != restarted.rows[T + 1].train_loss);
}

TEST_CASE("runs are deterministic") {
  const auto quad = make_noisy_quadratic(10, 1.0, 10.0, 1.0, 0);
  const auto config = config_for(ScheduleKind::cosine, 0.05, 40, 2, 0.9);
  const auto a = run(quad, config, 9);
  const auto b = run(quad, config, 9);
  CHECK(a.rows == b.rows);
  CHECK(a.sampled_epoch == b.sampled_epoch);
  CHECK(a.final_train_loss == b.final_train_loss);
  const auto c = run(quad, config, 10);
  CHECK(a.rows[5].train_loss != c.rows[5].train_loss);

  auto data = std::make_shared<const DatasetSplit>(synth_classification(64, 5, 3, 1));
  const auto mlp = make_smooth_mlp(data, nullptr, 6, 1e-4, 16, 2);
  const auto mlp_config = config_for(ScheduleKind::logarithmic, 0.1, 5, 1, 0.9);
  CHECK(run(mlp, mlp_config, 3).rows == run(mlp, mlp_config, 3).rows);
}

TEST_CASE("divergence is recorded, not thrown") {
  const auto bundle = make_noisy_quadratic(4, 1.0, 10.0, 0.0, 0);
  const auto trace = run(bundle, config_for(ScheduleKind::constant, 5.0, 100), 1);
  CHECK(trace.status == RunStatus::diverged);
  CHECK_FALSE(trace.failure.empty());
  CHECK(trace.rows.size() < 100);
  CHECK(trace.sampled_epoch == 0);
}

TEST_CASE("Armijo runs keep accepted steps valid") {
  auto data = std::make_shared<const DatasetSplit>(synth_classification(200, 6, 3, 5));
  const auto bundle = make_logreg(data, nullptr, 1e-4, 16, 0);
  auto config = config_for(ScheduleKind::constant, 5.0, 5);
  config.method = Method::sgd_armijo;
  config.log_armijo = true;
  const auto trace = run(bundle, config, 2);
  REQUIRE(trace.status == RunStatus::completed);
  CHECK(trace.armijo_log.size() == 5u * 13u);
  for (const auto& r : trace.armijo_log) {
    if (r.accepted) CHECK(r.f_trial <= r.f_x - r.c_armijo * r.eta * r.grad_sq);
    CHECK(r.eta <= 5.0);
  }
  CHECK(trace.final_train_loss < trace.rows.front().train_loss);
}

TEST_CASE("Adam and plateau runs") {
  const auto bundle = make_noisy_quadratic(10, 1.0, 10.0, 0.1, 0);
  auto adam = config_for(ScheduleKind::constant, 0.05, 50);
  adam.method = Method::adam;
  const auto trace = run(bundle, adam, 1);
  CHECK(trace.status == RunStatus::completed);
  CHECK(trace.final_train_loss < trace.rows.front().train_loss);

  const auto noisy = make_noisy_quadratic(10, 1.0, 10.0, 1.0, 0);
  auto plateau = config_for(ScheduleKind::plateau, 0.15, 60, 2);
  plateau.schedule.alpha = 0.5;
  plateau.plateau_patience = 3;
  const auto pt = run(noisy, plateau, 1);
  REQUIRE(pt.rows.size() == 120);
  CHECK(pt.rows[0].eta == 0.15);
  CHECK(pt.rows[60].eta == 0.15);
  bool reduced = false;
  for (std::size_t k = 1; k < 60; ++k) {
    CHECK(pt.rows[k].eta <= pt.rows[k - 1].eta);
    reduced = reduced || pt.rows[k].eta < 0.15;
  }
  CHECK(reduced);
}

TEST_CASE("batches per epoch") {
  auto data = std::make_shared<const DatasetSplit>(synth_classification(200, 4, 2, 1));
  const auto lr = make_logreg(data, nullptr, 0.0, 16, 0);
  auto config = config_for(ScheduleKind::constant, 0.1, 5);
  CHECK(effective_batches_per_epoch(lr, config) == 13);
  config.batches_per_epoch = 4;
  CHECK(effective_batches_per_epoch(lr, config) == 4);
  CHECK(effective_batches_per_epoch(make_noisy_quadratic(3, 1, 2, 1, 0), config_for(ScheduleKind::constant, 0.1, 5)) ==
        1);
}

TEST_CASE("run configuration is validated") {
  const auto bundle = make_noisy_quadratic(3, 1.0, 2.0, 0.0, 0);
  auto config = config_for(ScheduleKind::constant, 0.1, 5);
  config.mu = 1.0;
  CHECK_THROWS_AS(run(bundle, config, 1), DomainError);
  config = config_for(ScheduleKind::constant, 0.1, 5);
  config.seeds.clear();
  CHECK_THROWS_AS(config.validate(), DomainError);
  config = config_for(ScheduleKind::constant, 0.1, 5);
  config.armijo.c_armijo = 0.0;
  CHECK_THROWS_AS(config.validate(), DomainError);
  config = config_for(ScheduleKind::constant, 0.1, 5);
  config.restarts = 0;
  CHECK_THROWS_AS(config.validate(), DomainError);
  CHECK(parse_method("sgd_armijo") == Method::sgd_armijo);
  CHECK_THROWS_AS(parse_method("lbfgs"), DomainError);
}

TEST_CASE("grid search") {
  const double L = 1.0 / 0.437;
  const auto bundle = scalar_quadratic(L, 1.0);
  auto config = config_for(ScheduleKind::constant, 1.0, 20);
  config.seeds = {1, 2};

  const std::vector<double> single = {0.3};
  CHECK(grid_search(bundle, config, single, 0.0, 0.01).best_eta0 == 0.3);

  const auto coarse = default_coarse_grid();
  CHECK(coarse.front() == 1e-5);
  CHECK(coarse.back() == 1.0);
  const auto result = grid_search(bundle, config, coarse, 0.1, 0.01);
  CHECK(std::abs(result.best_eta0 - 0.437) <= 0.01);
  const auto best = std::min_element(result.table.begin(), result.table.end(),
                                     [](const GridEntry& a, const GridEntry& b) { return a.mean_val < b.mean_val; });
  CHECK(best->eta0 == result.best_eta0);
  CHECK(result.ranked().front().eta0 == result.best_eta0);
  int fine = 0;
  for (const auto& e : result.table) fine += e.stage == 2 ? 1 : 0;
  // 0.3 and 0.5 already sit on the coarse grid.
  CHECK(fine == 18);

  const std::vector<double> hopeless = {1e3, 1e4};
  CHECK_THROWS_AS(grid_search(bundle, config, hopeless, 0.0, 0.01), NoWinnerError);
  const std::vector<double> empty;
  CHECK_THROWS_AS(grid_search(bundle, config, empty, 0.0, 0.01), DomainError);
}
