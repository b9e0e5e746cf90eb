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

#include "logstep/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/sampling.hpp"

namespace logstep {

std::string_view to_string(RunStatus status) { return status == RunStatus::completed ? "completed" : "diverged"; }

std::string_view to_string(Method method) {
  switch (method) {
    case Method::sgd:
      return "sgd";
    case Method::sgd_armijo:
      return "sgd_armijo";
    case Method::adam:
      return "adam";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "sgd") return Method::sgd;
  if (name == "sgd_armijo") return Method::sgd_armijo;
  if (name == "adam") return Method::adam;
  throw DomainError(fmt::format("unknown method '{}'", name));
}

void RunConfig::validate() const {
  schedule.validate();
  if (restarts < 1) throw DomainError(fmt::format("restarts must be >= 1, got {}", restarts));
  if (batches_per_epoch < 0) throw DomainError("batches_per_epoch must be nonnegative");
  if (!(mu >= 0.0 && mu < 1.0)) throw DomainError(fmt::format("momentum must lie in [0, 1), got {}", mu));
  if (seeds.empty()) throw DomainError("at least one seed is required");
  if (!(armijo.c_armijo > 0.0 && armijo.c_armijo < 1.0)) {
    throw DomainError(fmt::format("armijo c must lie in (0, 1), got {}", armijo.c_armijo));
  }
  if (!(armijo.backtrack > 0.0 && armijo.backtrack < 1.0)) {
    throw DomainError(fmt::format("armijo backtrack must lie in (0, 1), got {}", armijo.backtrack));
  }
  if (armijo.max_backtracks < 0) throw DomainError("max_backtracks must be nonnegative");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw DomainError("adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw DomainError("adam eps must be positive");
  if (plateau_patience < 1) throw DomainError("plateau patience must be >= 1");
  if (!(plateau_threshold > 0.0)) throw DomainError("plateau threshold must be positive");
}

OptimizerState OptimizerState::start(const Vector& x0, double mu) {
  OptimizerState state;
  state.x = x0;
  state.velocity = Vector::Zero(x0.size());
  state.mu = mu;
  return state;
}

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw RunFailure(fmt::format("non-finite {}", what));
}

}  // namespace

void sgd_step(OptimizerState& state, const Vector& g, double eta) {
  require_finite(g, "gradient");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw RunFailure(fmt::format("invalid step size {}", eta));
  if (state.mu == 0.0) {
    state.x.noalias() -= eta * g;
  } else {
    state.velocity = state.mu * state.velocity + g;
    state.x.noalias() -= eta * (g + state.mu * state.velocity);
  }
  require_finite(state.x, "iterate");
  require_finite(state.velocity, "momentum buffer");
}

ArmijoResult armijo_search(const StochasticOracle& oracle, const OracleDraw& draw, const Vector& x, const Vector& g,
                           double eta_max, const ArmijoParams& params) {
  if (!(eta_max > 0.0)) throw DomainError(fmt::format("eta_max must be positive, got {}", eta_max));
  if (!(params.backtrack > 0.0 && params.backtrack < 1.0)) throw DomainError("backtrack must lie in (0, 1)");
  if (!(params.c_armijo > 0.0 && params.c_armijo < 1.0)) throw DomainError("armijo c must lie in (0, 1)");

  ArmijoResult result;
  result.c_armijo = params.c_armijo;
  result.f_x = oracle.component_value(draw, x);
  result.grad_sq = g.squaredNorm();
  double eta = eta_max;
  for (int k = 0; k <= params.max_backtracks; ++k) {
    result.eta = eta;
    result.trials = k + 1;
    result.f_trial = oracle.component_value(draw, x - eta * g);
    if (result.f_trial <= result.f_x - params.c_armijo * eta * result.grad_sq) {
      result.accepted = true;
      return result;
    }
    eta *= params.backtrack;
  }
  return result;
}

AdamState AdamState::zeros(Eigen::Index dim) {
  return {Vector::Zero(dim), Vector::Zero(dim), 0};
}

void adam_step(OptimizerState& state, AdamState& moments, const Vector& g, double eta, const AdamParams& params) {
  require_finite(g, "gradient");
  ++moments.step;
  moments.m = params.beta1 * moments.m + (1.0 - params.beta1) * g;
  moments.v = params.beta2 * moments.v + (1.0 - params.beta2) * g.cwiseAbs2();
  const double k = static_cast<double>(moments.step);
  const double m_scale = 1.0 / (1.0 - std::pow(params.beta1, k));
  const double v_scale = 1.0 / (1.0 - std::pow(params.beta2, k));
  state.x.array() -= eta * (moments.m.array() * m_scale) / ((moments.v.array() * v_scale).sqrt() + params.eps);
  require_finite(state.x, "iterate");
}

int effective_batches_per_epoch(const ProblemBundle& bundle, const RunConfig& config) {
  if (config.batches_per_epoch > 0) return config.batches_per_epoch;
  if (bundle.noise.kind == NoiseKind::minibatch) {
    const int n = bundle.problem->n_samples();
    const int b = bundle.noise.batch_size;
    return b >= n ? 1 : (n + b - 1) / b;
  }
  return 1;
}

RunTrace run(const ProblemBundle& bundle, const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const SmoothProblem& problem = *bundle.problem;
  const StepSchedule& schedule = config.schedule;
  const int T = schedule.T;
  const long long total_epochs = static_cast<long long>(config.restarts) * T;
  const int batches = effective_batches_per_epoch(bundle, config);

  RunTrace trace;
  trace.label = config.label;
  trace.seed = seed;
  trace.rows.reserve(static_cast<std::size_t>(total_epochs));

  auto oracle = bundle.make_oracle(seed);
  auto state = OptimizerState::start(problem.x_init(), config.method == Method::sgd ? config.mu : 0.0);
  auto moments = AdamState::zeros(problem.dim());
  PlateauState plateau;

  auto diverged = [&](const std::string& why) {
    trace.status = RunStatus::diverged;
    trace.failure = why;
  };

  try {
    for (long long k = 0; k < total_epochs; ++k) {
      const auto [cycle, t] = warm_restart_index(k, T);
      state.cycle = cycle;
      state.inner_t = t;

      TraceRow row;
      row.seed = seed;
      row.global_epoch = k + 1;
      row.cycle = cycle;
      row.t = t;
      row.train_loss = problem.value(state.x);
      row.grad_norm_sq = problem.gradient(state.x).squaredNorm();
      row.val_metric = problem.eval_metric(state.x);
      if (!std::isfinite(row.train_loss) || !std::isfinite(row.grad_norm_sq) || !std::isfinite(row.val_metric) ||
          row.train_loss > kDivergenceLimit) {
        diverged(fmt::format("divergence at global epoch {} (f = {})", row.global_epoch, row.train_loss));
        break;
      }

      if (t == 1) {
        if (cycle > 0 && config.reset_momentum) {
          state.velocity.setZero();
          moments = AdamState::zeros(problem.dim());
        }
        if (schedule.kind == ScheduleKind::plateau) {
          plateau = make_plateau_state(schedule.eta0, config.plateau_patience, config.plateau_threshold);
        }
      } else if (schedule.kind == ScheduleKind::plateau) {
        plateau = plateau_update(plateau, row.val_metric, schedule.alpha);
      }
      row.eta = schedule.kind == ScheduleKind::plateau ? plateau.current_eta : schedule.at(t);
      trace.rows.push_back(row);

      for (int b = 0; b < batches; ++b) {
        const auto draw = oracle.draw();
        const Vector g = oracle.component_gradient(draw, state.x);
        switch (config.method) {
          case Method::sgd:
            sgd_step(state, g, row.eta);
            break;
          case Method::sgd_armijo: {
            require_finite(g, "gradient");
            const auto search = armijo_search(oracle, draw, state.x, g, row.eta, config.armijo);
            state.x.noalias() -= search.eta * g;
            require_finite(state.x, "iterate");
            if (config.log_armijo) trace.armijo_log.push_back(search);
            break;
          }
          case Method::adam:
            adam_step(state, moments, g, row.eta, config.adam);
            break;
        }
      }
    }
  } catch (const RunFailure& failure) {
    diverged(failure.what());
  }

  if (trace.status == RunStatus::completed) {
    trace.final_train_loss = problem.value(state.x);
    trace.final_val_metric = problem.eval_metric(state.x);
    trace.final_accuracy = problem.accuracy(state.x);
    if (!std::isfinite(trace.final_train_loss) || trace.final_train_loss > kDivergenceLimit) {
      diverged(fmt::format("divergence after the last epoch (f = {})", trace.final_train_loss));
    }
  }
  if (trace.status == RunStatus::diverged) return trace;

  std::mt19937_64 sampler(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<double> etas(trace.rows.size());
  for (std::size_t k = 0; k < etas.size(); ++k) etas[k] = trace.rows[k].eta;
  try {
    trace.sampled_epoch = sample_iterate(OutputDistribution::from_steps(etas), sampler);
  } catch (const DegenerateDistributionError&) {
    trace.sampled_epoch = 0;
  }
  for (int cycle = 0; cycle < config.restarts; ++cycle) {
    const std::span<const double> cycle_etas(etas.data() + static_cast<std::ptrdiff_t>(cycle) * T,
                                             static_cast<std::size_t>(T));
    try {
      trace.sampled_per_cycle.push_back(sample_iterate(OutputDistribution::from_steps(cycle_etas), sampler));
    } catch (const DegenerateDistributionError&) {
      trace.sampled_per_cycle.push_back(0);
    }
  }
  return trace;
}

}  // namespace logstep
