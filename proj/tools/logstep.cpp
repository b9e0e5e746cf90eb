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
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "logstep/bounds.hpp"
#include "logstep/error.hpp"
#include "logstep/harness.hpp"
#include "logstep/optimizer.hpp"
#include "logstep/sampling.hpp"
#include "logstep/schedules.hpp"

namespace {

using json = nlohmann::json;
using namespace logstep;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitBoundViolation = 4;

struct ScheduleFlags {
  std::string kind = "logarithmic";
  double eta0 = 0.1;
  int T = 100;
  double alpha = 0.0;
  double beta = 1.0;
  std::vector<int> milestones;

  StepSchedule schedule() const {
    StepSchedule s;
    s.kind = parse_schedule_kind(kind);
    s.eta0 = eta0;
    s.T = T;
    s.alpha = alpha;
    s.beta = beta;
    s.milestones = milestones;
    s.validate();
    return s;
  }
};

void add_schedule_flags(CLI::App* cmd, ScheduleFlags& flags) {
  cmd->add_option("--kind", flags.kind, "schedule name");
  cmd->add_option("--eta0", flags.eta0, "initial step size");
  cmd->add_option("--T", flags.T, "epochs per cycle");
  cmd->add_option("--alpha", flags.alpha, "decay parameter");
  cmd->add_option("--beta", flags.beta, "exponential-schedule parameter");
  cmd->add_option("--milestones", flags.milestones, "stagewise milestones")->delimiter(',');
}

void add_problem_flags(CLI::App* cmd, ProblemSpec& spec) {
  cmd->add_option("--problem", spec.name, "noisy_quadratic, quad_cosine, logreg or mlp");
  cmd->add_option("--dim", spec.dim);
  cmd->add_option("--eigmin", spec.eigmin);
  cmd->add_option("--eigmax", spec.eigmax);
  cmd->add_option("--sigma", spec.sigma, "gradient noise for synthetic problems");
  cmd->add_option("--a", spec.a);
  cmd->add_option("--b", spec.b);
  cmd->add_option("--hidden", spec.hidden);
  cmd->add_option("--l2", spec.l2);
  cmd->add_option("--batch-size", spec.batch_size);
  cmd->add_option("--max-n", spec.n, "maximum number of training samples");
  cmd->add_option("--n-val", spec.n_val);
  cmd->add_option("--features", spec.features);
  cmd->add_option("--classes", spec.classes);
  cmd->add_option("--data-dir", spec.data_dir, "directory with IDX files");
  cmd->add_option("--problem-seed", spec.seed);
}

json problem_json(const ProblemSpec& spec) {
  return {{"name", spec.name},     {"dim", spec.dim},       {"eigmin", spec.eigmin},
          {"eigmax", spec.eigmax}, {"sigma", spec.sigma},   {"a", spec.a},
          {"b", spec.b},           {"hidden", spec.hidden}, {"l2", spec.l2},
          {"batch_size", spec.batch_size}, {"n", spec.n},   {"n_val", spec.n_val},
          {"features", spec.features},     {"classes", spec.classes},
          {"data_dir", spec.data_dir},     {"seed", spec.seed}};
}

std::vector<std::uint64_t> seed_list(int count) {
  if (count < 1) throw ConfigError("seeds", "need at least one seed");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
  return seeds;
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path));
  out << text;
}

std::filesystem::path dat_path(const std::string& csv) {
  auto p = std::filesystem::path(csv);
  p.replace_extension(".dat");
  return p;
}

int schedules_dump(const ScheduleFlags& flags, int restarts, const std::string& out) {
  if (restarts < 1) throw ConfigError("restarts", "must be >= 1");
  const auto schedule = flags.schedule();
  const auto table = schedule_table(schedule);
  std::string csv = "global_epoch,cycle,t,eta\n";
  std::vector<double> epoch, eta;
  const long long total = static_cast<long long>(restarts) * schedule.T;
  for (long long k = 0; k < total; ++k) {
    const auto idx = warm_restart_index(k, schedule.T);
    const double value = table[static_cast<std::size_t>(idx.t - 1)];
    csv += fmt::format("{},{},{},{}\n", k + 1, idx.cycle, idx.t, format_double(value));
    epoch.push_back(static_cast<double>(k + 1));
    eta.push_back(value);
  }
  write_file(out, csv);
  if (!out.empty() && out != "-") {
    const std::vector<std::string> cols = {"global_epoch", "eta"};
    const std::vector<std::vector<double>> data = {epoch, eta};
    write_dat(dat_path(out), cols, data);
  }
  return kExitOk;
}

std::string short_label(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::logarithmic: return "p_log";
    case ScheduleKind::cosine: return "p_cos";
    default: return fmt::format("p_{}", to_string(kind));
  }
}

int dist_compare(const ScheduleFlags& flags, const std::vector<std::string>& kinds, const std::string& out) {
  std::vector<StepSchedule> schedules;
  for (const auto& name : kinds) {
    ScheduleFlags f = flags;
    f.kind = name;
    schedules.push_back(f.schedule());
  }
  const auto cmp = compare_distributions(schedules);
  std::vector<std::string> cols = {"t"};
  for (const auto& s : schedules) cols.push_back(short_label(s.kind));
  std::string csv = fmt::format("{}\n", fmt::join(cols, ","));
  std::vector<std::vector<double>> data(cols.size());
  for (int t = 1; t <= cmp.T; ++t) {
    csv += std::to_string(t);
    data[0].push_back(t);
    for (std::size_t j = 0; j < cmp.columns.size(); ++j) {
      const double p = cmp.columns[j][static_cast<std::size_t>(t - 1)];
      csv += "," + format_double(p);
      data[j + 1].push_back(p);
    }
    csv += "\n";
  }
  write_file(out, csv);
  if (!out.empty() && out != "-") write_dat(dat_path(out), cols, data);
  return kExitOk;
}

int bounds_verify(double eta0, const std::vector<int>& horizons, const std::string& out) {
  json reports = json::array();
  for (const int T : horizons) {
    const auto r = verify_sum_bounds(eta0, T);
    reports.push_back({{"eta0", r.eta0},
                       {"T", r.T},
                       {"direct_sum", r.direct_sum},
                       {"direct_sum_sq", r.direct_sum_sq},
                       {"lemma2", r.lemma2},
                       {"lemma3", r.lemma3},
                       {"lower_holds", r.lower_holds},
                       {"upper_holds", r.upper_holds}});
  }
  write_file(out, reports.dump(2) + "\n");
  return kExitOk;
}

int bounds_eval(const std::string& which, const std::string& params_text) {
  json params;
  try {
    params = json::parse(params_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("params", e.what());
  }
  if (!params.is_object()) throw ConfigError("params", "expected a JSON object");
  auto get = [&](const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_number()) throw ConfigError(fmt::format("params.{}", key), "expected a number");
    return params[key].get<double>();
  };
  static const std::set<std::string> known = {"c", "L", "sigma", "delta1", "T", "l", "delta1_max"};
  for (const auto& [key, value] : params.items()) {
    if (!known.count(key)) throw ConfigError(fmt::format("params.{}", key), "unknown field");
  }
  TheoremInputs in;
  in.c = get("c", in.c);
  in.L = get("L", in.L);
  in.sigma = get("sigma", in.sigma);
  in.delta1 = get("delta1", in.delta1);
  in.T = static_cast<int>(get("T", in.T));
  in.l = static_cast<int>(get("l", in.l));
  in.delta1_max = get("delta1_max", in.delta1_max);
  double value = 0.0;
  if (which == "theorem1") {
    value = theorem1_bound(in);
  } else if (which == "cor1") {
    value = corollary1_bound(in.L, in.sigma, in.delta1, in.T).bound;
  } else if (which == "cor2") {
    value = corollary2_bound(in);
  } else {
    throw ConfigError("which", "expected theorem1, cor1 or cor2");
  }
  std::cout << format_double(value) << "\n";
  return kExitOk;
}

struct RunFlags {
  ProblemSpec problem;
  ScheduleFlags schedule;
  std::string method = "sgd";
  int restarts = 1;
  int batches = 0;
  double mu = 0.9;
  int seeds = 5;
  int workers = 0;
  bool reset_momentum = false;
  bool strict = false;
  std::string out = "runs";
};

json run_config_json(const RunFlags& f) {
  json sched = {{"kind", f.schedule.kind}, {"eta0", f.schedule.eta0}, {"alpha", f.schedule.alpha},
                {"beta", f.schedule.beta}};
  if (!f.schedule.milestones.empty()) sched["milestones"] = f.schedule.milestones;
  return {{"problem", problem_json(f.problem)},
          {"T", f.schedule.T},
          {"restarts", f.restarts},
          {"batches_per_epoch", f.batches},
          {"mu", f.mu},
          {"seeds", seed_list(f.seeds)},
          {"workers", f.workers},
          {"reset_momentum", f.reset_momentum},
          {"variants", json::array({{{"label", fmt::format("{}_{}", f.method, f.schedule.kind)},
                                     {"method", f.method},
                                     {"schedule", sched}}})}};
}

int exit_status(const std::filesystem::path& out_dir, const std::vector<RunTrace>& traces, bool strict) {
  const bool diverged = std::any_of(traces.begin(), traces.end(),
                                    [](const RunTrace& t) { return t.status == RunStatus::diverged; });
  std::ifstream in(out_dir / "summary.json");
  const auto summary = json::parse(in);
  bool violated = false;
  for (const auto& entry : summary.at("methods")) {
    const auto line = entry.contains("error")
                          ? fmt::format("{}: {}", entry["label"].get<std::string>(), entry["error"].get<std::string>())
                          : fmt::format("{}: final loss {:.6g} +- {:.3g}, metric {:.6g} +- {:.3g} ({} seeds, {} diverged)",
                                        entry["label"].get<std::string>(), entry["mean_final_loss"].get<double>(),
                                        entry["loss_margin95"].get<double>(), entry["mean_final_metric"].get<double>(),
                                        entry["metric_margin95"].get<double>(), entry["n_seeds"].get<int>(),
                                        entry["n_diverged"].get<int>());
    std::cout << line << "\n";
    if (entry.contains("bound") && entry["bound"].contains("satisfied")) {
      const bool ok = entry["bound"]["satisfied"].get<bool>();
      std::cout << fmt::format("  bound {:.6g} vs measured {:.6g}: {}\n", entry["bound"]["bound"].get<double>(),
                               entry["bound"]["measured"].get<double>(), ok ? "satisfied" : "VIOLATED");
      violated = violated || !ok;
    }
  }
  if (strict && violated) return kExitBoundViolation;
  if (diverged) return kExitDiverged;
  return kExitOk;
}

int run_command(const RunFlags& flags) {
  const auto config = parse_experiment_config(run_config_json(flags).dump());
  const auto result = execute_experiment(config, flags.out);
  return exit_status(flags.out, result.traces, flags.strict);
}

int experiment_command(const std::string& path, const std::string& out, bool strict) {
  const auto config = load_experiment_config(path);
  const auto result = execute_experiment(config, out);
  return exit_status(out, result.traces, strict);
}

int grid_command(const RunFlags& flags, std::vector<double> coarse, double radius, double step) {
  if (coarse.empty()) coarse = default_coarse_grid();
  const auto config = parse_experiment_config(run_config_json(flags).dump());
  ProblemBundle bundle;
  try {
    bundle = build_problem(config.problem);
  } catch (const DomainError& e) {
    throw ConfigError("problem", e.what());
  }
  const auto result = grid_search(bundle, config.variants.front(), coarse, radius, step);
  json table = json::array();
  for (const auto& e : result.ranked()) {
    table.push_back({{"eta0", e.eta0},
                     {"stage", e.stage == 1 ? "coarse" : "fine"},
                     {"mean_val", std::isfinite(e.mean_val) ? json(e.mean_val) : json(nullptr)},
                     {"diverged", e.diverged},
                     {"per_seed", e.per_seed}});
  }
  const json doc = {{"best_eta0", result.best_eta0}, {"ranked", table}};
  write_file(flags.out, doc.dump(2) + "\n");
  return kExitOk;
}

int report_command(const std::string& dir, double confidence) {
  const auto traces = load_experiment_traces(dir);
  const auto summaries = summarize_by_label(traces, confidence);
  json out = json::array();
  for (const auto& s : summaries) {
    json entry = {{"label", s.label},
                  {"n_seeds", s.n_seeds},
                  {"n_diverged", s.n_diverged},
                  {"mean_final_loss", s.mean_final_loss},
                  {"loss_margin", s.loss_margin95},
                  {"mean_final_metric", s.mean_final_metric},
                  {"metric_margin", s.metric_margin95},
                  {"mean_sampled_loss", s.mean_sampled_loss}};
    if (s.mean_final_accuracy) {
      entry["mean_final_accuracy"] = *s.mean_final_accuracy;
      entry["accuracy_margin"] = s.accuracy_margin95;
    }
    out.push_back(entry);
  }
  std::cout << json({{"confidence", confidence}, {"methods", out}}).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logstep: step-size schedules, output sampling and convergence bounds"};
  app.require_subcommand(1);

  ScheduleFlags sched;
  int restarts = 1;
  std::string out;

  auto* schedules = app.add_subcommand("schedules", "step-size tables");
  auto* dump = schedules->add_subcommand("dump", "write a schedule table as CSV");
  schedules->require_subcommand(1);
  add_schedule_flags(dump, sched);
  dump->add_option("--restarts", restarts);
  dump->add_option("--out", out, "CSV path")->required();

  auto* dist = app.add_subcommand("dist", "output-iterate distributions");
  dist->require_subcommand(1);
  auto* compare = dist->add_subcommand("compare", "compare distributions induced by several schedules");
  std::vector<std::string> kinds = {"logarithmic", "cosine"};
  add_schedule_flags(compare, sched);
  compare->add_option("--kinds", kinds)->delimiter(',');
  compare->add_option("--out", out, "CSV path")->required();

  auto* bounds = app.add_subcommand("bounds", "step-sum and convergence bounds");
  bounds->require_subcommand(1);
  auto* verify = bounds->add_subcommand("verify", "compare step sums with their bounds");
  double eta0 = 1.0;
  std::vector<int> horizons = {2, 10, 100, 1000, 10000, 100000};
  verify->add_option("--eta0", eta0);
  verify->add_option("--T-list", horizons)->delimiter(',');
  verify->add_option("--out", out, "JSON path");
  auto* eval = bounds->add_subcommand("eval", "evaluate a convergence bound");
  std::string which, params = "{}";
  eval->add_option("--which", which)->required();
  eval->add_option("--params", params, "JSON object of bound inputs");

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "train with one method over several seeds");
  add_problem_flags(run_cmd, run_flags.problem);
  add_schedule_flags(run_cmd, run_flags.schedule);
  auto add_run_flags = [&run_flags](CLI::App* cmd) {
    cmd->add_option("--method", run_flags.method, "sgd, sgd_armijo or adam");
    cmd->add_option("--restarts", run_flags.restarts);
    cmd->add_option("--batches", run_flags.batches, "batches per epoch (0: automatic)");
    cmd->add_option("--mu", run_flags.mu, "momentum");
    cmd->add_option("--seeds", run_flags.seeds, "number of seeds");
    cmd->add_option("--workers", run_flags.workers);
    cmd->add_flag("--reset-momentum", run_flags.reset_momentum);
  };
  add_run_flags(run_cmd);
  run_cmd->add_option("--out", run_flags.out, "output directory");
  run_cmd->add_flag("--strict", run_flags.strict, "exit 4 when a convergence bound is violated");

  auto* grid = app.add_subcommand("grid", "two-stage step-size grid search");
  add_problem_flags(grid, run_flags.problem);
  add_schedule_flags(grid, run_flags.schedule);
  add_run_flags(grid);
  std::vector<double> coarse;
  double radius = 0.1, step = 0.01;
  grid->add_option("--coarse", coarse)->delimiter(',');
  grid->add_option("--fine-radius", radius);
  grid->add_option("--fine-step", step);
  grid->add_option("--out", run_flags.out, "JSON path ('-' for stdout)");

  auto* report = app.add_subcommand("report", "seed-averaged summary of an output directory");
  std::string in_dir;
  double confidence = 0.95;
  report->add_option("--in", in_dir)->required();
  report->add_option("--confidence", confidence);

  auto* experiment = app.add_subcommand("experiment", "run a JSON experiment configuration");
  std::string config_path;
  bool strict = false;
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--out", out, "output directory")->required();
  experiment->add_flag("--strict", strict);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (dump->parsed()) return schedules_dump(sched, restarts, out);
    if (compare->parsed()) return dist_compare(sched, kinds, out);
    if (verify->parsed()) return bounds_verify(eta0, horizons, out);
    if (eval->parsed()) return bounds_eval(which, params);
    if (run_cmd->parsed()) return run_command(run_flags);
    if (grid->parsed()) {
      if (run_flags.out == "runs") run_flags.out = "-";
      return grid_command(run_flags, coarse, radius, step);
    }
    if (report->parsed()) return report_command(in_dir, confidence);
    if (experiment->parsed()) return experiment_command(config_path, out, strict);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
