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
#include <map>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/harness.hpp"
#include "logstep/numeric.hpp"

namespace logstep {

namespace {

double mean_of(std::span<const double> values) {
  return compensated_sum(values) / static_cast<double>(values.size());
}

}  // namespace

double t_margin(std::span<const double> values, double confidence) {
  if (values.size() < 2) throw SummaryError("a confidence margin needs at least two values");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw DomainError(fmt::format("confidence must lie in (0, 1), got {}", confidence));
  }
  const double n = static_cast<double>(values.size());
  const double mean = mean_of(values);
  CompensatedSum squares;
  for (double v : values) squares.add((v - mean) * (v - mean));
  const double stddev = std::sqrt(squares.value() / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double quantile = boost::math::quantile(dist, 1.0 - (1.0 - confidence) / 2.0);
  return quantile * stddev / std::sqrt(n);
}

RunSummary summarize(std::span<const RunTrace> traces, double confidence) {
  RunSummary summary;
  if (!traces.empty()) summary.label = traces.front().label;
  std::vector<double> losses;
  std::vector<double> metrics;
  std::vector<double> accuracies;
  std::vector<double> sampled;
  for (const auto& trace : traces) {
    if (trace.status == RunStatus::diverged) {
      ++summary.n_diverged;
      continue;
    }
    losses.push_back(trace.final_train_loss);
    metrics.push_back(trace.final_val_metric);
    if (trace.final_accuracy) accuracies.push_back(*trace.final_accuracy);
    if (trace.sampled_epoch >= 1 && trace.sampled_epoch <= static_cast<long long>(trace.rows.size())) {
      sampled.push_back(trace.rows[static_cast<std::size_t>(trace.sampled_epoch - 1)].train_loss);
    }
  }
  if (losses.size() < 2) {
    throw SummaryError(fmt::format("'{}': {} completed run(s), need at least 2", summary.label, losses.size()));
  }
  summary.n_seeds = static_cast<int>(losses.size());
  summary.mean_final_loss = mean_of(losses);
  summary.loss_margin95 = t_margin(losses, confidence);
  summary.mean_final_metric = mean_of(metrics);
  summary.metric_margin95 = t_margin(metrics, confidence);
  if (accuracies.size() == losses.size()) {
    summary.mean_final_accuracy = mean_of(accuracies);
    summary.accuracy_margin95 = t_margin(accuracies, confidence);
  }
  if (!sampled.empty()) summary.mean_sampled_loss = mean_of(sampled);
  return summary;
}

std::vector<RunSummary> summarize_by_label(std::span<const RunTrace> traces, double confidence) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunTrace>> groups;
  for (const auto& trace : traces) {
    auto [it, inserted] = groups.try_emplace(trace.label);
    if (inserted) order.push_back(trace.label);
    it->second.push_back(trace);
  }
  std::vector<RunSummary> out;
  for (const auto& label : order) out.push_back(summarize(groups[label], confidence));
  return out;
}

double rate_fit(std::span<const double> horizons, std::span<const double> values) {
  if (horizons.size() != values.size()) throw InputError("rate_fit: horizons and values differ in length");
  if (horizons.size() < 3) throw DomainError("rate_fit needs at least three points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (!(horizons[k] > 0.0) || !(values[k] > 0.0)) {
      throw DomainError(fmt::format("rate_fit needs positive data, got ({}, {})", horizons[k], values[k]));
    }
    lx.push_back(std::log(horizons[k]));
    ly.push_back(std::log(values[k]));
  }
  const double mx = mean_of(lx);
  const double my = mean_of(ly);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("rate_fit needs at least two distinct horizons");
  return sxy / sxx;
}

}  // namespace logstep
