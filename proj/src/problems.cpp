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

#include "logstep/problems.hpp"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/idx.hpp"

namespace logstep {

SmoothProblem::SmoothProblem(std::string name, int dim, std::optional<double> lipschitz, double f_lb,
                             Vector x_init)
    : name_(std::move(name)), dim_(dim), lipschitz_(lipschitz), f_lb_(f_lb), x_init_(std::move(x_init)) {
  if (dim_ < 1) throw DomainError(fmt::format("{}: dimension must be positive", name_));
  if (x_init_.size() != dim_) throw InputError(fmt::format("{}: x_init has wrong dimension", name_));
}

void SmoothProblem::check_dim(const Vector& x) const {
  if (x.size() != dim_) {
    throw InputError(fmt::format("{}: expected a {}-vector, got {}", name_, dim_, x.size()));
  }
}

double SmoothProblem::value(const Vector& x) const {
  check_dim(x);
  const double f = do_value(x);
  // NaN passes through so the optimizer can report divergence.
  if (f < f_lb_) {
    throw InvariantError(fmt::format("{}: f(x) = {} below certified lower bound {}", name_, f, f_lb_));
  }
  return f;
}

Vector SmoothProblem::gradient(const Vector& x) const {
  check_dim(x);
  return do_gradient(x);
}

double SmoothProblem::batch_value(const Vector& x, std::span<const int> /*batch*/) const { return value(x); }

Vector SmoothProblem::batch_gradient(const Vector& x, std::span<const int> /*batch*/) const { return gradient(x); }

double SmoothProblem::per_sample_variance(const Vector& /*x*/) const { return 0.0; }

DiagonalQuadratic::DiagonalQuadratic(Vector diagonal, Vector x_init)
    : SmoothProblem("quadratic", static_cast<int>(diagonal.size()), diagonal.size() ? diagonal.maxCoeff() : 0.0,
                    0.0, std::move(x_init)),
      diagonal_(std::move(diagonal)) {
  if ((diagonal_.array() < 0.0).any()) throw DomainError("quadratic: curvatures must be nonnegative");
  if (!(diagonal_.maxCoeff() > 0.0)) throw DomainError("quadratic: largest curvature must be positive");
}

double DiagonalQuadratic::do_value(const Vector& x) const {
  return 0.5 * (diagonal_.array() * x.array().square()).sum();
}

Vector DiagonalQuadratic::do_gradient(const Vector& x) const { return diagonal_.cwiseProduct(x); }

QuadCosine::QuadCosine(int dim, double a, double b, Vector x_init)
    : SmoothProblem("quad_cosine", dim, 1.0 + a * b * b, -a * dim, std::move(x_init)), a_(a), b_(b) {
  if (!(a >= 0.0)) throw DomainError(fmt::format("quad_cosine: a must be nonnegative, got {}", a));
  if (!(b > 0.0)) throw DomainError(fmt::format("quad_cosine: b must be positive, got {}", b));
}

double QuadCosine::do_value(const Vector& x) const {
  return (0.5 * x.array().square() + a_ * (b_ * x.array()).cos()).sum();
}

Vector QuadCosine::do_gradient(const Vector& x) const {
  return (x.array() - a_ * b_ * (b_ * x.array()).sin()).matrix();
}

ProblemBundle make_diagonal_quadratic(Vector diagonal, Vector x_init, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError(fmt::format("sigma must be nonnegative, got {}", sigma));
  ProblemBundle bundle;
  bundle.problem = std::make_shared<DiagonalQuadratic>(std::move(diagonal), std::move(x_init));
  bundle.noise = {NoiseKind::gaussian, sigma, 1};
  bundle.sigma = sigma;
  bundle.default_seed = seed;
  return bundle;
}

ProblemBundle make_noisy_quadratic(int dim, double eigmin, double eigmax, double sigma, std::uint64_t seed) {
  if (dim < 1) throw DomainError(fmt::format("dimension must be positive, got {}", dim));
  if (!(eigmin > 0.0 && eigmin <= eigmax)) {
    throw DomainError(fmt::format("need 0 < eigmin <= eigmax, got [{}, {}]", eigmin, eigmax));
  }
  Vector diagonal(dim);
  if (dim == 1) {
    diagonal[0] = eigmax;
  } else {
    const double ratio = std::log(eigmax / eigmin);
    for (int i = 0; i < dim; ++i) diagonal[i] = eigmin * std::exp(ratio * i / (dim - 1));
    // Pin the endpoints so L is exactly eigmax.
    diagonal[0] = eigmin;
    diagonal[dim - 1] = eigmax;
  }
  auto bundle = make_diagonal_quadratic(std::move(diagonal), Vector::Ones(dim), sigma, seed);
  return bundle;
}

ProblemBundle make_quad_cosine(int dim, double a, double b, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError(fmt::format("sigma must be nonnegative, got {}", sigma));
  ProblemBundle bundle;
  bundle.problem = std::make_shared<QuadCosine>(dim, a, b, Vector::Constant(dim, 2.0));
  bundle.noise = {NoiseKind::gaussian, sigma, 1};
  bundle.sigma = sigma;
  bundle.default_seed = seed;
  return bundle;
}

namespace {

std::pair<std::shared_ptr<const DatasetSplit>, std::shared_ptr<const DatasetSplit>> classifier_data(
    const ProblemSpec& spec) {
  std::string dir = spec.data_dir;
  if (const char* env = std::getenv("LOGSTEP_DATA_DIR"); env != nullptr && *env != '\0') dir = env;
  if (!dir.empty()) {
    if (auto loaded = load_fashion_mnist(dir, spec.n, spec.n_val)) {
      return {std::make_shared<const DatasetSplit>(std::move(loaded->first)),
              std::make_shared<const DatasetSplit>(std::move(loaded->second))};
    }
  }
  auto all = synth_classification(spec.n + spec.n_val, spec.features, spec.classes, spec.seed);
  auto [train, val] = split_head(all, spec.n);
  return {std::make_shared<const DatasetSplit>(std::move(train)),
          spec.n_val > 0 ? std::make_shared<const DatasetSplit>(std::move(val)) : nullptr};
}

}  // namespace

ProblemBundle build_problem(const ProblemSpec& spec) {
  if (spec.name == "noisy_quadratic") return make_noisy_quadratic(spec.dim, spec.eigmin, spec.eigmax, spec.sigma, spec.seed);
  if (spec.name == "quad_cosine") return make_quad_cosine(spec.dim, spec.a, spec.b, spec.sigma, spec.seed);
  if (spec.name == "logreg") {
    auto [train, val] = classifier_data(spec);
    return make_logreg(train, val, spec.l2, spec.batch_size, spec.seed);
  }
  if (spec.name == "mlp") {
    auto [train, val] = classifier_data(spec);
    return make_smooth_mlp(train, val, spec.hidden, spec.l2, spec.batch_size, spec.seed);
  }
  throw DomainError(fmt::format("unknown problem '{}'", spec.name));
}

}  // namespace logstep
