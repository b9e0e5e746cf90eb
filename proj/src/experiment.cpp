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
#include <atomic>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "logstep/error.hpp"
#include "logstep/harness.hpp"

namespace logstep {

using json = nlohmann::json;

namespace {

// Typed access to one JSON object with path-qualified errors; finish()
// rejects keys that were never read.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return object_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return required(key, fallback);
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    if (!has(key)) return required(key, fallback);
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<long long>();
  }

  int small_integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    const long long v = integer(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
      throw ConfigError(field(key), "integer out of range");
    }
    return static_cast<int>(v);
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) return required(key, fallback);
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    if (!has(key)) return required(key, fallback);
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  template <typename T>
  std::vector<T> integer_list(const std::string& key, std::optional<std::vector<T>> fallback = std::nullopt) {
    if (!has(key)) return required(key, fallback);
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<T> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number_integer()) throw ConfigError(fmt::format("{}[{}]", field(key), k), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v[k].get<long long>() < 0) throw ConfigError(fmt::format("{}[{}]", field(key), k), "expected a nonnegative integer");
      }
      out.push_back(v[k].get<T>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!used_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  template <typename T>
  T required(const std::string& key, const std::optional<T>& fallback) {
    if (!fallback) throw ConfigError(field(key), "required field is missing");
    return *fallback;
  }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

ProblemSpec parse_problem(const json& node) {
  ObjectReader in(node, "problem");
  ProblemSpec spec;
  spec.name = in.string("name");
  spec.dim = in.small_integer("dim", spec.dim);
  spec.eigmin = in.number("eigmin", spec.eigmin);
  spec.eigmax = in.number("eigmax", spec.eigmax);
  spec.sigma = in.number("sigma", spec.sigma);
  spec.a = in.number("a", spec.a);
  spec.b = in.number("b", spec.b);
  spec.hidden = in.small_integer("hidden", spec.hidden);
  spec.l2 = in.number("l2", spec.l2);
  spec.batch_size = in.small_integer("batch_size", spec.batch_size);
  spec.n = in.small_integer("n", spec.n);
  spec.n_val = in.small_integer("n_val", spec.n_val);
  spec.features = in.small_integer("features", spec.features);
  spec.classes = in.small_integer("classes", spec.classes);
  spec.data_dir = in.string("data_dir", spec.data_dir);
  const auto seed = in.integer("seed", 0);
  if (seed < 0) throw ConfigError("problem.seed", "expected a nonnegative integer");
  spec.seed = static_cast<std::uint64_t>(seed);
  in.finish();
  static const std::set<std::string> known = {"noisy_quadratic", "quad_cosine", "logreg", "mlp"};
  if (!known.count(spec.name)) throw ConfigError("problem.name", fmt::format("unknown problem '{}'", spec.name));
  return spec;
}

bool valid_label(const std::string& label) {
  return !label.empty() && std::all_of(label.begin(), label.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.';
  });
}

RunConfig parse_variant(const json& node, const std::string& path, const RunConfig& defaults) {
  ObjectReader in(node, path);
  RunConfig config = defaults;
  config.label = in.string("label");
  if (!valid_label(config.label)) throw ConfigError(in.field("label"), "labels use [A-Za-z0-9_.-] only");
  try {
    config.method = parse_method(in.string("method", "sgd"));
  } catch (const DomainError& e) {
    throw ConfigError(in.field("method"), e.what());
  }
  config.mu = in.number("mu", config.mu);
  config.reset_momentum = in.boolean("reset_momentum", config.reset_momentum);
  if (in.has("seeds")) config.seeds = in.integer_list<std::uint64_t>("seeds");

  if (!in.has("schedule")) throw ConfigError(in.field("schedule"), "required field is missing");
  ObjectReader sched(in.raw("schedule"), in.field("schedule"));
  try {
    config.schedule.kind = parse_schedule_kind(sched.string("kind"));
  } catch (const DomainError& e) {
    throw ConfigError(sched.field("kind"), e.what());
  }
  config.schedule.eta0 = sched.number("eta0");
  config.schedule.alpha = sched.number("alpha", 0.0);
  config.schedule.beta = sched.number("beta", 1.0);
  if (sched.has("milestones") && sched.has("stages")) {
    throw ConfigError(sched.field("stages"), "give either milestones or stages, not both");
  }
  if (sched.has("milestones")) config.schedule.milestones = sched.integer_list<int>("milestones");
  if (sched.has("stages")) {
    try {
      config.schedule.milestones = default_milestones(config.schedule.T, sched.small_integer("stages"));
    } catch (const DomainError& e) {
      throw ConfigError(sched.field("stages"), e.what());
    }
  }
  sched.finish();

  if (in.has("armijo")) {
    ObjectReader a(in.raw("armijo"), in.field("armijo"));
    config.armijo.c_armijo = a.number("c", config.armijo.c_armijo);
    config.armijo.backtrack = a.number("backtrack", config.armijo.backtrack);
    config.armijo.max_backtracks = a.small_integer("max_backtracks", config.armijo.max_backtracks);
    a.finish();
  }
  if (in.has("adam")) {
    ObjectReader a(in.raw("adam"), in.field("adam"));
    config.adam.beta1 = a.number("beta1", config.adam.beta1);
    config.adam.beta2 = a.number("beta2", config.adam.beta2);
    config.adam.eps = a.number("eps", config.adam.eps);
    a.finish();
  }
  in.finish();
  try {
    config.validate();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return config;
}

json trace_entry(const RunTrace& trace, const std::string& file) {
  json entry = {
      {"label", trace.label},
      {"seed", trace.seed},
      {"file", file},
      {"status", std::string(to_string(trace.status))},
      {"failure", trace.failure},
      {"rows", trace.rows.size()},
      {"sampled_epoch", trace.sampled_epoch},
      {"sampled_per_cycle", trace.sampled_per_cycle},
      {"final_train_loss", trace.final_train_loss},
      {"final_val_metric", trace.final_val_metric},
      {"fingerprint", trace.fingerprint},
  };
  entry["final_accuracy"] = trace.final_accuracy ? json(*trace.final_accuracy) : json(nullptr);
  return entry;
}

std::string trace_file_name(const RunTrace& trace) { return fmt::format("{}_seed{}.csv", trace.label, trace.seed); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", fmt::format("invalid JSON at byte {}: {}", e.byte, e.what()));
  }
  ObjectReader in(root, "");
  ExperimentConfig config;
  if (!in.has("problem")) throw ConfigError("problem", "required field is missing");
  config.problem = parse_problem(in.raw("problem"));

  RunConfig defaults;
  defaults.schedule.T = in.small_integer("T");
  if (defaults.schedule.T < 2) throw ConfigError("T", "epochs per cycle must be >= 2");
  defaults.restarts = in.small_integer("restarts", 1);
  defaults.batches_per_epoch = in.small_integer("batches_per_epoch", 0);
  defaults.mu = in.number("mu", 0.9);
  defaults.seeds = in.integer_list<std::uint64_t>("seeds", defaults.seeds);
  defaults.reset_momentum = in.boolean("reset_momentum", false);
  defaults.plateau_patience = in.small_integer("plateau_patience", defaults.plateau_patience);
  defaults.plateau_threshold = in.number("plateau_threshold", defaults.plateau_threshold);
  config.workers = in.small_integer("workers", 0);
  if (config.workers < 0) throw ConfigError("workers", "expected a nonnegative integer");

  if (!in.has("variants")) throw ConfigError("variants", "required field is missing");
  const auto& variants = in.raw("variants");
  if (!variants.is_array() || variants.empty()) throw ConfigError("variants", "expected a nonempty array");
  std::set<std::string> labels;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const auto path = fmt::format("variants[{}]", k);
    auto variant = parse_variant(variants[k], path, defaults);
    if (!labels.insert(variant.label).second) throw ConfigError(path + ".label", "duplicate label");
    config.variants.push_back(std::move(variant));
  }
  in.finish();
  config.canonical = root.dump();
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str());
}

std::string fingerprint(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < length; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

std::vector<RunTrace> run_jobs(const ProblemBundle& bundle, std::span<const RunJob> jobs, int workers) {
  std::vector<RunTrace> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        results[k] = run(bundle, jobs[k].config, jobs[k].seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::size_t pool = workers > 0 ? static_cast<std::size_t>(workers) : std::max(1u, std::thread::hardware_concurrency());
  pool = std::min(pool, std::max<std::size_t>(jobs.size(), 1));
  if (pool <= 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t k = 0; k < pool; ++k) threads.emplace_back(work);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return results;
}

ExperimentResult execute_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  ProblemBundle bundle;
  try {
    bundle = build_problem(config.problem);
  } catch (const DomainError& e) {
    throw ConfigError("problem", e.what());
  }

  std::vector<RunJob> jobs;
  for (const auto& variant : config.variants) {
    for (const auto seed : variant.seeds) jobs.push_back({variant, seed});
  }

  ExperimentResult result;
  result.fingerprint = fingerprint(config.canonical);
  result.traces = run_jobs(bundle, jobs, config.workers);
  for (auto& trace : result.traces) trace.fingerprint = result.fingerprint;

  std::filesystem::create_directories(out_dir);
  json manifest = json::array();
  for (const auto& trace : result.traces) {
    const auto file = trace_file_name(trace);
    write_trace_csv(out_dir / file, trace.rows);
    manifest.push_back(trace_entry(trace, file));
  }
  write_text(out_dir / "runs.json", manifest.dump(2) + "\n");

  json summaries = json::array();
  const auto constants = constants_of(bundle);
  for (const auto& variant : config.variants) {
    std::vector<RunTrace> group;
    for (const auto& trace : result.traces) {
      if (trace.label == variant.label) group.push_back(trace);
    }
    json entry = {{"label", variant.label}};
    try {
      const auto summary = summarize(group);
      result.summaries.push_back(summary);
      entry["n_seeds"] = summary.n_seeds;
      entry["n_diverged"] = summary.n_diverged;
      entry["mean_final_loss"] = summary.mean_final_loss;
      entry["loss_margin95"] = summary.loss_margin95;
      entry["mean_final_metric"] = summary.mean_final_metric;
      entry["metric_margin95"] = summary.metric_margin95;
      entry["mean_sampled_loss"] = summary.mean_sampled_loss;
      if (summary.mean_final_accuracy) {
        entry["mean_final_accuracy"] = *summary.mean_final_accuracy;
        entry["accuracy_margin95"] = summary.accuracy_margin95;
      }
    } catch (const SummaryError& e) {
      entry["error"] = e.what();
    }
    if (variant.schedule.kind == ScheduleKind::logarithmic && variant.method == Method::sgd && variant.mu == 0.0) {
      std::vector<RunTrace> completed;
      std::copy_if(group.begin(), group.end(), std::back_inserter(completed),
                   [](const RunTrace& t) { return t.status == RunStatus::completed; });
      try {
        if (!completed.empty()) {
          const auto report = bound_report_mean(completed, variant.schedule, variant.restarts, constants);
          entry["bound"] = {{"measured", report.measured},
                            {"bound", report.bound},
                            {"slack", report.slack},
                            {"c", report.c},
                            {"advisory", !report.satisfied.has_value()}};
          if (report.satisfied) entry["bound"]["satisfied"] = *report.satisfied;
        }
      } catch (const PreconditionError& e) {
        entry["bound"] = {{"skipped", e.what()}};
      }
    }
    summaries.push_back(entry);
  }
  const json summary_doc = {{"fingerprint", result.fingerprint}, {"confidence", 0.95}, {"methods", summaries}};
  write_text(out_dir / "summary.json", summary_doc.dump(2) + "\n");
  return result;
}

std::vector<RunTrace> load_experiment_traces(const std::filesystem::path& dir) {
  std::ifstream in(dir / "runs.json", std::ios::binary);
  if (!in) throw InputError(fmt::format("no runs.json in {}", dir.string()));
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", (dir / "runs.json").string(), e.what()));
  }
  std::vector<RunTrace> traces;
  try {
    for (const auto& entry : manifest) {
      RunTrace trace;
      trace.label = entry.at("label").get<std::string>();
      trace.seed = entry.at("seed").get<std::uint64_t>();
      trace.status = entry.at("status").get<std::string>() == "completed" ? RunStatus::completed : RunStatus::diverged;
      trace.failure = entry.at("failure").get<std::string>();
      trace.sampled_epoch = entry.at("sampled_epoch").get<long long>();
      trace.sampled_per_cycle = entry.at("sampled_per_cycle").get<std::vector<int>>();
      trace.final_train_loss = entry.at("final_train_loss").get<double>();
      trace.final_val_metric = entry.at("final_val_metric").get<double>();
      trace.fingerprint = entry.at("fingerprint").get<std::string>();
      if (!entry.at("final_accuracy").is_null()) trace.final_accuracy = entry.at("final_accuracy").get<double>();
      trace.rows = read_trace_csv(dir / entry.at("file").get<std::string>());
      traces.push_back(std::move(trace));
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("{}: {}", (dir / "runs.json").string(), e.what()));
  }
  return traces;
}

}  // namespace logstep
