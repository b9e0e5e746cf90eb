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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logstep/optimizer.hpp"
#include "logstep/problems.hpp"
#include "logstep/trace.hpp"

namespace logstep {

// ---------------------------------------------------------------------------
// Trace CSV: seed,global_epoch,cycle,t,eta,train_loss,grad_norm_sq,val_metric
// Floats are written with 17 significant digits so a read returns the exact
// doubles that were written.

inline constexpr std::string_view kTraceCsvHeader = "seed,global_epoch,cycle,t,eta,train_loss,grad_norm_sq,val_metric";

std::string format_double(double value);
std::string format_trace_csv(std::span<const TraceRow> rows);
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows);
std::vector<TraceRow> parse_trace_csv(std::string_view text);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Seed aggregation.

struct RunSummary {
  std::string label;
  int n_seeds = 0;  // completed runs entering the means
  int n_diverged = 0;
  double mean_final_loss = 0.0;
  double loss_margin95 = 0.0;
  double mean_final_metric = 0.0;
  double metric_margin95 = 0.0;
  std::optional<double> mean_final_accuracy;
  double accuracy_margin95 = 0.0;
  // Training loss logged at the sampled output iterate.
  double mean_sampled_loss = 0.0;
};

/// Half-width of the two-sided Student-t interval (n - 1 degrees of freedom)
/// for the mean of `values`. Needs at least two values.
double t_margin(std::span<const double> values, double confidence = 0.95);

/// Summary for one method; diverged traces are counted, not averaged.
/// Throws SummaryError with fewer than two completed traces.
RunSummary summarize(std::span<const RunTrace> traces, double confidence = 0.95);

/// Groups traces by label (first-seen order) and summarizes each group.
std::vector<RunSummary> summarize_by_label(std::span<const RunTrace> traces, double confidence = 0.95);

// ---------------------------------------------------------------------------
// Convergence-bound comparison for logarithmic-schedule runs.

struct ProblemConstants {
  double L = 1.0;
  bool L_empirical = false;
  double sigma = 0.0;
  bool sigma_empirical = false;
  double f_lb = 0.0;
};

ProblemConstants constants_of(const ProblemBundle& bundle);

struct BoundReport {
  double measured = 0.0;  // weighted gradient measure over the whole trace
  double bound = 0.0;     // theorem bound (l = 1) or warm-restart bound (l > 1)
  std::optional<bool> satisfied;  // empty in advisory mode
  double slack = 0.0;     // bound / measured
  double c = 0.0;         // 1 / (eta0 L)
  double delta = 0.0;     // delta1 or delta1_max used
  int T = 0;
  int l = 1;
};

/// Requires a completed, dense logarithmic-schedule trace with
/// eta0 = 1 / (c L) for some c > 1; throws PreconditionError otherwise.
BoundReport bound_report(const RunTrace& trace, const StepSchedule& schedule, int restarts,
                         const ProblemConstants& constants);

/// Seed-averaged comparison: mean measured value against mean bound.
BoundReport bound_report_mean(std::span<const RunTrace> traces, const StepSchedule& schedule, int restarts,
                              const ProblemConstants& constants);

/// Least-squares slope of ln(value) against ln(T). Needs >= 3 positive pairs.
double rate_fit(std::span<const double> horizons, std::span<const double> values);

// ---------------------------------------------------------------------------
// Experiments.

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<RunConfig> variants;  // each carries its own label and seeds
  int workers = 0;                  // 0: available parallelism
  std::string canonical;            // normalized JSON used for the fingerprint
};

/// Parses and schema-checks a JSON document. Errors carry the JSON path of the
/// offending field.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Hex SHA-256 of `text`.
std::string fingerprint(std::string_view text);

struct ExperimentResult {
  std::vector<RunTrace> traces;  // variant-major, seed-minor
  std::vector<RunSummary> summaries;
  std::string fingerprint;
};

/// Runs every (variant, seed) on a bounded worker pool and writes
/// `<label>_seed<seed>.csv`, `runs.json` and `summary.json` into out_dir.
ExperimentResult execute_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Reads traces back from a directory written by execute_experiment.
std::vector<RunTrace> load_experiment_traces(const std::filesystem::path& dir);

struct RunJob {
  RunConfig config;
  std::uint64_t seed = 0;
};

/// Runs the jobs on at most `workers` threads (0: available parallelism).
/// Results are returned in job order.
std::vector<RunTrace> run_jobs(const ProblemBundle& bundle, std::span<const RunJob> jobs, int workers);

/// gnuplot-friendly whitespace table with a '#' header line.
void write_dat(const std::filesystem::path& path, std::span<const std::string> columns,
               std::span<const std::vector<double>> data);

}  // namespace logstep
