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

#include <stdexcept>
#include <string>

namespace logstep {

// Argument outside the mathematical domain of an operation (t outside [1,T],
// T < 2, negative alpha, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input data (length mismatch, non-finite metric).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of a bound or update rule does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// All step sizes are zero, so no output distribution exists.
class DegenerateDistributionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A problem invariant (f >= f_lb, finite values) was violated at runtime.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite iterate or update; the optimizer run is aborted.
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment configuration does not match the schema. `field` is a JSON path
// such as "variants[2].schedule.eta0".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Too few completed runs to produce a summary.
class SummaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every configuration in a grid search diverged.
class NoWinnerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace logstep
