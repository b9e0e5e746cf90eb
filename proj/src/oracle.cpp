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

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/problems.hpp"

namespace logstep {

StochasticOracle::StochasticOracle(std::shared_ptr<const SmoothProblem> problem, OracleSpec spec,
                                   std::uint64_t seed)
    : problem_(std::move(problem)), spec_(spec), rng_(seed) {
  if (!problem_) throw InputError("oracle needs a problem");
  if (spec_.kind == NoiseKind::gaussian && !(spec_.sigma >= 0.0)) {
    throw DomainError(fmt::format("gaussian sigma must be nonnegative, got {}", spec_.sigma));
  }
  if (spec_.kind == NoiseKind::minibatch) {
    if (problem_->n_samples() < 1) throw InputError("minibatch oracle needs a finite-sum problem");
    if (spec_.batch_size < 1) throw DomainError(fmt::format("batch size must be positive, got {}", spec_.batch_size));
  }
}

OracleDraw StochasticOracle::draw() {
  OracleDraw out;
  if (spec_.kind == NoiseKind::gaussian) {
    if (spec_.sigma > 0.0) {
      const int d = problem_->dim();
      std::normal_distribution<double> normal(0.0, spec_.sigma / std::sqrt(static_cast<double>(d)));
      out.shift.resize(d);
      for (int i = 0; i < d; ++i) out.shift[i] = normal(rng_);
    }
    return out;
  }
  const int n = problem_->n_samples();
  if (spec_.batch_size >= n) {
    out.batch.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.batch[static_cast<std::size_t>(i)] = i;
    return out;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  out.batch.resize(static_cast<std::size_t>(spec_.batch_size));
  for (auto& index : out.batch) index = pick(rng_);
  return out;
}

double StochasticOracle::component_value(const OracleDraw& draw, const Vector& x) const {
  if (spec_.kind == NoiseKind::gaussian) {
    const double f = problem_->value(x);
    return draw.shift.size() ? f + draw.shift.dot(x) : f;
  }
  return problem_->batch_value(x, draw.batch);
}

Vector StochasticOracle::component_gradient(const OracleDraw& draw, const Vector& x) const {
  if (spec_.kind == NoiseKind::gaussian) {
    Vector g = problem_->gradient(x);
    if (draw.shift.size()) g += draw.shift;
    return g;
  }
  return problem_->batch_gradient(x, draw.batch);
}

Vector StochasticOracle::sample_gradient(const Vector& x) {
  const auto d = draw();
  return component_gradient(d, x);
}

double estimate_minibatch_sigma(const SmoothProblem& problem, int batch_size, int n_probes, std::uint64_t seed) {
  if (batch_size < 1) throw DomainError(fmt::format("batch size must be positive, got {}", batch_size));
  if (n_probes < 1) throw DomainError("need at least one probe point");
  const int n = problem.n_samples();
  if (n < 1) throw InputError("minibatch sigma needs a finite-sum problem");
  if (batch_size >= n) return 0.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  double worst = problem.per_sample_variance(problem.x_init());
  for (int probe = 1; probe < n_probes; ++probe) {
    Vector x = problem.x_init();
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += normal(rng);
    worst = std::max(worst, problem.per_sample_variance(x));
  }
  return std::sqrt(1.2 * worst / batch_size);
}

}  // namespace logstep
