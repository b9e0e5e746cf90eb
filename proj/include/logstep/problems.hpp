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

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace logstep {

using Vector = Eigen::VectorXd;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Features in [0, 1] (one row per sample) with integer class labels.
struct DatasetSplit {
  FeatureMatrix features;
  std::vector<int> labels;
  int n_classes = 0;

  int size() const { return static_cast<int>(labels.size()); }
  int n_features() const { return static_cast<int>(features.cols()); }
  // Throws InputError on inconsistent shapes or out-of-range labels.
  void validate() const;
};

/// Smooth objective with known structural constants. Every call to value()
/// checks f(x) >= f_lb and throws InvariantError otherwise.
class SmoothProblem {
 public:
  virtual ~SmoothProblem() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  /// Gradient Lipschitz constant; nullopt when only an empirical estimate exists.
  std::optional<double> lipschitz() const { return lipschitz_; }
  double f_lb() const { return f_lb_; }
  const Vector& x_init() const { return x_init_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  /// Validation objective reported in traces. Defaults to value().
  virtual double eval_metric(const Vector& x) const { return value(x); }
  /// Validation accuracy for classifiers.
  virtual std::optional<double> accuracy(const Vector& /*x*/) const { return std::nullopt; }

  /// Number of summands for finite-sum objectives, 0 otherwise.
  virtual int n_samples() const { return 0; }
  /// Objective restricted to the listed samples (regularizer included), so
  /// that its expectation under uniform sampling is f.
  virtual double batch_value(const Vector& x, std::span<const int> batch) const;
  virtual Vector batch_gradient(const Vector& x, std::span<const int> batch) const;
  /// (1/n) sum_i ||grad f_i(x) - grad f(x)||^2 over the data term.
  virtual double per_sample_variance(const Vector& x) const;

 protected:
  SmoothProblem(std::string name, int dim, std::optional<double> lipschitz, double f_lb, Vector x_init);

  virtual double do_value(const Vector& x) const = 0;
  virtual Vector do_gradient(const Vector& x) const = 0;

  void check_dim(const Vector& x) const;

 private:
  std::string name_;
  int dim_;
  std::optional<double> lipschitz_;
  double f_lb_;
  Vector x_init_;
};

/// f(x) = 1/2 sum_i a_i x_i^2 with a_i >= 0. L = max a_i, f* = 0.
class DiagonalQuadratic final : public SmoothProblem {
 public:
  DiagonalQuadratic(Vector diagonal, Vector x_init);
  const Vector& diagonal() const { return diagonal_; }

 private:
  double do_value(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;
  Vector diagonal_;
};

/// f(x) = sum_i x_i^2 / 2 + a cos(b x_i). L = 1 + a b^2, f >= -a d.
class QuadCosine final : public SmoothProblem {
 public:
  QuadCosine(int dim, double a, double b, Vector x_init);

 private:
  double do_value(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;
  double a_;
  double b_;
};

/// Shared plumbing for cross-entropy classifiers over a DatasetSplit.
class ClassifierProblem : public SmoothProblem {
 public:
  double eval_metric(const Vector& x) const override;
  std::optional<double> accuracy(const Vector& x) const override;
  int n_samples() const override { return train_->size(); }
  double batch_value(const Vector& x, std::span<const int> batch) const override;
  Vector batch_gradient(const Vector& x, std::span<const int> batch) const override;
  double per_sample_variance(const Vector& x) const override;

  double l2() const { return l2_; }
  const DatasetSplit& train() const { return *train_; }
  bool has_validation() const { return validation_ != nullptr; }

 protected:
  ClassifierProblem(std::string name, int dim, std::optional<double> lipschitz, Vector x_init,
                    std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                    double l2);

  struct Evaluation {
    double loss = 0.0;  // mean cross-entropy, no regularizer
    Vector grad;        // gradient of the mean data loss (when requested)
    double mean_sq_sample_grad = 0.0;  // (1/n) sum ||grad f_i||^2 (when requested)
    int correct = 0;
  };

  enum class Want { loss, gradient, sample_norms };

  virtual Evaluation evaluate(const Vector& x, const FeatureMatrix& features, std::span<const int> labels,
                              Want want) const = 0;

  double do_value(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

 private:
  FeatureMatrix gather(std::span<const int> batch, std::vector<int>& labels) const;

  std::shared_ptr<const DatasetSplit> train_;
  std::shared_ptr<const DatasetSplit> validation_;
  double l2_;
};

/// Multinomial logistic regression with bias and l2 penalty over all
/// parameters. Parameters: W (C x d, column-major) then b (C).
class LogisticRegression final : public ClassifierProblem {
 public:
  LogisticRegression(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                     double l2);

 private:
  struct Checked {};
  LogisticRegression(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                     double l2, Checked);
  Evaluation evaluate(const Vector& x, const FeatureMatrix& features, std::span<const int> labels,
                      Want want) const override;
  int n_classes_;
  int n_features_;
};

/// One hidden softplus layer, cross-entropy, l2 penalty. Parameters:
/// W1 (h x d), b1 (h), W2 (C x h), b2 (C), matrices column-major.
class SmoothMlp final : public ClassifierProblem {
 public:
  SmoothMlp(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation, int hidden,
            double l2, std::uint64_t seed);
  int hidden() const { return hidden_; }

  /// Vector with the output layer (W2, b2) zeroed.
  Vector zero_output_layer(Vector x) const;

 private:
  struct Checked {};
  SmoothMlp(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation, int hidden,
            double l2, std::uint64_t seed, Checked);
  Evaluation evaluate(const Vector& x, const FeatureMatrix& features, std::span<const int> labels,
                      Want want) const override;
  int n_classes_;
  int n_features_;
  int hidden_;
};

enum class NoiseKind { gaussian, minibatch };

struct OracleSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 0.0;  // gaussian: E||xi||^2 = sigma^2 exactly
  int batch_size = 1;  // minibatch: >= n means the deterministic full batch
};

/// One sampled component function f_i of the stochastic objective.
struct OracleDraw {
  std::vector<int> batch;  // minibatch indices
  Vector shift;            // gaussian: f_i(x) = f(x) + <shift, x>; empty when sigma = 0
};

/// Unbiased stochastic gradient oracle. Owns its generator; not shareable
/// across threads.
class StochasticOracle {
 public:
  StochasticOracle(std::shared_ptr<const SmoothProblem> problem, OracleSpec spec, std::uint64_t seed);

  OracleDraw draw();
  double component_value(const OracleDraw& draw, const Vector& x) const;
  Vector component_gradient(const OracleDraw& draw, const Vector& x) const;
  Vector sample_gradient(const Vector& x);

  void reseed(std::uint64_t seed) { rng_.seed(seed); }
  const SmoothProblem& problem() const { return *problem_; }
  const OracleSpec& spec() const { return spec_; }

 private:
  std::shared_ptr<const SmoothProblem> problem_;
  OracleSpec spec_;
  std::mt19937_64 rng_;
};

/// A problem together with its noise model and the declared noise bound.
struct ProblemBundle {
  std::shared_ptr<const SmoothProblem> problem;
  OracleSpec noise;
  double sigma = 0.0;
  bool sigma_empirical = false;
  std::uint64_t default_seed = 0;

  StochasticOracle make_oracle(std::uint64_t seed) const { return {problem, noise, seed}; }
  StochasticOracle make_oracle() const { return make_oracle(default_seed); }
};

/// Diagonal quadratic with eigenvalues log-spaced in [eigmin, eigmax],
/// x_init = ones, gaussian noise of total variance sigma^2.
ProblemBundle make_noisy_quadratic(int dim, double eigmin, double eigmax, double sigma, std::uint64_t seed);
ProblemBundle make_diagonal_quadratic(Vector diagonal, Vector x_init, double sigma, std::uint64_t seed);

/// x_init = 2 * ones.
ProblemBundle make_quad_cosine(int dim, double a, double b, double sigma, std::uint64_t seed);

/// Minibatch sigma is the empirical estimate from estimate_minibatch_sigma.
ProblemBundle make_logreg(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                          double l2, int batch_size, std::uint64_t seed);
ProblemBundle make_smooth_mlp(std::shared_ptr<const DatasetSplit> train,
                              std::shared_ptr<const DatasetSplit> validation, int hidden, double l2, int batch_size,
                              std::uint64_t seed);

/// sqrt(1.2 * max over probes of per_sample_variance / batch_size); probes are
/// x_init plus N(0, 0.1^2) perturbations. Exact for sampling with replacement.
double estimate_minibatch_sigma(const SmoothProblem& problem, int batch_size, int n_probes, std::uint64_t seed);

/// Gaussian class clusters in [0, 1]^d, labels balanced, order shuffled.
DatasetSplit synth_classification(int n, int d, int n_classes, std::uint64_t seed);

/// Splits off the first `head` samples.
std::pair<DatasetSplit, DatasetSplit> split_head(const DatasetSplit& split, int head);

/// Problem selection shared by the CLI and experiment configs.
struct ProblemSpec {
  std::string name = "noisy_quadratic";  // noisy_quadratic | quad_cosine | logreg | mlp
  int dim = 10;
  double eigmin = 1.0;
  double eigmax = 10.0;
  double sigma = 1.0;
  double a = 1.0;
  double b = 2.0;
  int hidden = 64;
  double l2 = 1e-4;
  int batch_size = 128;
  int n = 2000;
  int n_val = 500;
  int features = 100;
  int classes = 10;
  std::string data_dir;  // FashionMNIST IDX files; synthetic data when empty or missing
  std::uint64_t seed = 0;
};

/// Builds the problem; classifier problems use FashionMNIST from data_dir
/// when its IDX files exist, synthetic clusters otherwise.
ProblemBundle build_problem(const ProblemSpec& spec);

}  // namespace logstep
