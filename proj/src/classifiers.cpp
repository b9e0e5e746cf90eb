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

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/problems.hpp"

namespace logstep {

namespace {

using Matrix = Eigen::MatrixXd;

struct SoftmaxOutput {
  double loss_sum = 0.0;
  Matrix residual;  // P - Y, one row per sample
  int correct = 0;
};

SoftmaxOutput softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, bool want_residual) {
  SoftmaxOutput out;
  const Eigen::Index rows = logits.rows();
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Matrix exps = (logits.colwise() - row_max).array().exp().matrix();
  const Eigen::VectorXd sums = exps.rowwise().sum();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    out.loss_sum += row_max[i] + std::log(sums[i]) - logits(i, y);
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (best == y) ++out.correct;
  }
  if (want_residual) {
    out.residual = (exps.array().colwise() / sums.array()).matrix();
    for (Eigen::Index i = 0; i < rows; ++i) out.residual(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  return out;
}

Matrix softplus(const Matrix& u) {
  return (u.array().max(0.0) + (-u.array().abs()).exp().log1p()).matrix();
}

Matrix sigmoid(const Matrix& u) { return (1.0 / (1.0 + (-u.array()).exp())).matrix(); }

double logreg_lipschitz(const DatasetSplit& train, double l2) {
  const Eigen::Index d = train.features.cols();
  Matrix gram(d + 1, d + 1);
  gram.topLeftCorner(d, d) = train.features.transpose() * train.features;
  const Eigen::VectorXd col_sums = train.features.colwise().sum().transpose();
  gram.topRightCorner(d, 1) = col_sums;
  gram.bottomLeftCorner(1, d) = col_sums.transpose();
  gram(d, d) = static_cast<double>(train.size());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  const double op_norm_sq = solver.eigenvalues().maxCoeff();
  return op_norm_sq / (2.0 * train.size()) + l2;
}

std::shared_ptr<const DatasetSplit> checked(std::shared_ptr<const DatasetSplit> split, const char* what) {
  if (!split) throw InputError(fmt::format("{} split is required", what));
  split->validate();
  if (split->size() == 0) throw InputError(fmt::format("{} split is empty", what));
  return split;
}

}  // namespace

ClassifierProblem::ClassifierProblem(std::string name, int dim, std::optional<double> lipschitz, Vector x_init,
                                     std::shared_ptr<const DatasetSplit> train,
                                     std::shared_ptr<const DatasetSplit> validation, double l2)
    : SmoothProblem(std::move(name), dim, lipschitz, 0.0, std::move(x_init)),
      train_(std::move(train)),
      validation_(std::move(validation)),
      l2_(l2) {
  if (!(l2 >= 0.0)) throw DomainError(fmt::format("l2 must be nonnegative, got {}", l2));
  if (validation_) {
    validation_->validate();
    if (validation_->n_features() != train_->n_features() || validation_->n_classes != train_->n_classes) {
      throw InputError("validation split shape differs from the training split");
    }
  }
}

FeatureMatrix ClassifierProblem::gather(std::span<const int> batch, std::vector<int>& labels) const {
  if (batch.empty()) throw InputError("empty minibatch");
  FeatureMatrix rows(static_cast<Eigen::Index>(batch.size()), train_->features.cols());
  labels.resize(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const int index = batch[k];
    if (index < 0 || index >= train_->size()) throw InputError(fmt::format("sample index {} out of range", index));
    rows.row(static_cast<Eigen::Index>(k)) = train_->features.row(index);
    labels[k] = train_->labels[static_cast<std::size_t>(index)];
  }
  return rows;
}

double ClassifierProblem::do_value(const Vector& x) const {
  return evaluate(x, train_->features, train_->labels, Want::loss).loss + 0.5 * l2_ * x.squaredNorm();
}

Vector ClassifierProblem::do_gradient(const Vector& x) const {
  Vector g = evaluate(x, train_->features, train_->labels, Want::gradient).grad;
  g += l2_ * x;
  return g;
}

double ClassifierProblem::batch_value(const Vector& x, std::span<const int> batch) const {
  check_dim(x);
  std::vector<int> labels;
  const auto rows = gather(batch, labels);
  return evaluate(x, rows, labels, Want::loss).loss + 0.5 * l2_ * x.squaredNorm();
}

Vector ClassifierProblem::batch_gradient(const Vector& x, std::span<const int> batch) const {
  check_dim(x);
  std::vector<int> labels;
  const auto rows = gather(batch, labels);
  Vector g = evaluate(x, rows, labels, Want::gradient).grad;
  g += l2_ * x;
  return g;
}

double ClassifierProblem::per_sample_variance(const Vector& x) const {
  check_dim(x);
  const auto ev = evaluate(x, train_->features, train_->labels, Want::sample_norms);
  return std::max(0.0, ev.mean_sq_sample_grad - ev.grad.squaredNorm());
}

double ClassifierProblem::eval_metric(const Vector& x) const {
  if (!validation_) return value(x);
  check_dim(x);
  return evaluate(x, validation_->features, validation_->labels, Want::loss).loss;
}

std::optional<double> ClassifierProblem::accuracy(const Vector& x) const {
  check_dim(x);
  const DatasetSplit& split = validation_ ? *validation_ : *train_;
  const auto ev = evaluate(x, split.features, split.labels, Want::loss);
  return static_cast<double>(ev.correct) / split.size();
}

LogisticRegression::LogisticRegression(std::shared_ptr<const DatasetSplit> train,
                                       std::shared_ptr<const DatasetSplit> validation, double l2)
    : LogisticRegression(checked(std::move(train), "training"), std::move(validation), l2, Checked{}) {}

LogisticRegression::LogisticRegression(std::shared_ptr<const DatasetSplit> train,
                                       std::shared_ptr<const DatasetSplit> validation, double l2, Checked)
    : ClassifierProblem("logreg", (train->n_features() + 1) * train->n_classes, logreg_lipschitz(*train, l2),
                        Vector::Zero((train->n_features() + 1) * train->n_classes), train, std::move(validation),
                        l2),
      n_classes_(train->n_classes),
      n_features_(train->n_features()) {}

ClassifierProblem::Evaluation LogisticRegression::evaluate(const Vector& x, const FeatureMatrix& features,
                                                           std::span<const int> labels, Want want) const {
  const Eigen::Index C = n_classes_;
  const Eigen::Index d = n_features_;
  if (features.cols() != d) throw InputError("feature dimension mismatch");
  const Eigen::Map<const Matrix> W(x.data(), C, d);
  const auto b = x.segment(C * d, C);

  Matrix logits = features * W.transpose();
  logits.rowwise() += b.transpose();
  const auto soft = softmax_cross_entropy(logits, labels, want != Want::loss);

  Evaluation ev;
  const double rows = static_cast<double>(features.rows());
  ev.loss = soft.loss_sum / rows;
  ev.correct = soft.correct;
  if (want == Want::loss) return ev;

  ev.grad.resize(x.size());
  Eigen::Map<Matrix> dW(ev.grad.data(), C, d);
  dW.noalias() = soft.residual.transpose() * features / rows;
  ev.grad.segment(C * d, C) = soft.residual.colwise().sum().transpose() / rows;

  if (want == Want::sample_norms) {
    const Eigen::VectorXd feature_sq = features.rowwise().squaredNorm();
    const Eigen::VectorXd residual_sq = soft.residual.rowwise().squaredNorm();
    ev.mean_sq_sample_grad = (residual_sq.array() * (feature_sq.array() + 1.0)).sum() / rows;
  }
  return ev;
}

namespace {

int positive_hidden(int hidden) {
  if (hidden < 1) throw DomainError(fmt::format("hidden width must be >= 1, got {}", hidden));
  return hidden;
}

Vector mlp_init(int n_features, int hidden, int n_classes, std::uint64_t seed) {
  const Eigen::Index w1 = static_cast<Eigen::Index>(hidden) * n_features;
  const Eigen::Index w2 = static_cast<Eigen::Index>(n_classes) * hidden;
  Vector x = Vector::Zero(w1 + hidden + w2 + n_classes);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> first(0.0, 1.0 / std::sqrt(static_cast<double>(n_features)));
  std::normal_distribution<double> second(0.0, 1.0 / std::sqrt(static_cast<double>(hidden)));
  for (Eigen::Index i = 0; i < w1; ++i) x[i] = first(rng);
  for (Eigen::Index i = 0; i < w2; ++i) x[w1 + hidden + i] = second(rng);
  return x;
}

}  // namespace

SmoothMlp::SmoothMlp(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                     int hidden, double l2, std::uint64_t seed)
    : SmoothMlp(checked(std::move(train), "training"), std::move(validation), positive_hidden(hidden), l2, seed,
                Checked{}) {}

SmoothMlp::SmoothMlp(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                     int hidden, double l2, std::uint64_t seed, Checked)
    : ClassifierProblem("mlp", hidden * train->n_features() + hidden + train->n_classes * hidden + train->n_classes,
                        std::nullopt, mlp_init(train->n_features(), hidden, train->n_classes, seed), train,
                        std::move(validation), l2),
      n_classes_(train->n_classes),
      n_features_(train->n_features()),
      hidden_(hidden) {}

Vector SmoothMlp::zero_output_layer(Vector x) const {
  check_dim(x);
  const Eigen::Index offset = static_cast<Eigen::Index>(hidden_) * n_features_ + hidden_;
  x.tail(x.size() - offset).setZero();
  return x;
}

ClassifierProblem::Evaluation SmoothMlp::evaluate(const Vector& x, const FeatureMatrix& features,
                                                  std::span<const int> labels, Want want) const {
  const Eigen::Index C = n_classes_;
  const Eigen::Index d = n_features_;
  const Eigen::Index h = hidden_;
  if (features.cols() != d) throw InputError("feature dimension mismatch");
  const Eigen::Map<const Matrix> W1(x.data(), h, d);
  const auto b1 = x.segment(h * d, h);
  const Eigen::Index w2_offset = h * d + h;
  const Eigen::Map<const Matrix> W2(x.data() + w2_offset, C, h);
  const auto b2 = x.segment(w2_offset + C * h, C);

  Matrix pre = features * W1.transpose();
  pre.rowwise() += b1.transpose();
  const Matrix act = softplus(pre);
  Matrix logits = act * W2.transpose();
  logits.rowwise() += b2.transpose();
  const auto soft = softmax_cross_entropy(logits, labels, want != Want::loss);

  Evaluation ev;
  const double rows = static_cast<double>(features.rows());
  ev.loss = soft.loss_sum / rows;
  ev.correct = soft.correct;
  if (want == Want::loss) return ev;

  const Matrix delta_hidden = ((soft.residual * W2).array() * sigmoid(pre).array()).matrix();

  ev.grad.resize(x.size());
  Eigen::Map<Matrix> dW1(ev.grad.data(), h, d);
  dW1.noalias() = delta_hidden.transpose() * features / rows;
  ev.grad.segment(h * d, h) = delta_hidden.colwise().sum().transpose() / rows;
  Eigen::Map<Matrix> dW2(ev.grad.data() + w2_offset, C, h);
  dW2.noalias() = soft.residual.transpose() * act / rows;
  ev.grad.segment(w2_offset + C * h, C) = soft.residual.colwise().sum().transpose() / rows;

  if (want == Want::sample_norms) {
    const Eigen::VectorXd feature_sq = features.rowwise().squaredNorm();
    const Eigen::VectorXd act_sq = act.rowwise().squaredNorm();
    const Eigen::VectorXd hidden_sq = delta_hidden.rowwise().squaredNorm();
    const Eigen::VectorXd residual_sq = soft.residual.rowwise().squaredNorm();
    ev.mean_sq_sample_grad = ((hidden_sq.array() * (feature_sq.array() + 1.0)) +
                              (residual_sq.array() * (act_sq.array() + 1.0)))
                                 .sum() /
                             rows;
  }
  return ev;
}

ProblemBundle make_logreg(std::shared_ptr<const DatasetSplit> train, std::shared_ptr<const DatasetSplit> validation,
                          double l2, int batch_size, std::uint64_t seed) {
  ProblemBundle bundle;
  bundle.problem = std::make_shared<LogisticRegression>(std::move(train), std::move(validation), l2);
  bundle.noise = {NoiseKind::minibatch, 0.0, batch_size};
  bundle.sigma = estimate_minibatch_sigma(*bundle.problem, batch_size, 50, seed);
  bundle.sigma_empirical = true;
  bundle.default_seed = seed;
  return bundle;
}

ProblemBundle make_smooth_mlp(std::shared_ptr<const DatasetSplit> train,
                              std::shared_ptr<const DatasetSplit> validation, int hidden, double l2, int batch_size,
                              std::uint64_t seed) {
  ProblemBundle bundle;
  bundle.problem = std::make_shared<SmoothMlp>(std::move(train), std::move(validation), hidden, l2, seed);
  bundle.noise = {NoiseKind::minibatch, 0.0, batch_size};
  bundle.sigma = estimate_minibatch_sigma(*bundle.problem, batch_size, 50, seed);
  bundle.sigma_empirical = true;
  bundle.default_seed = seed;
  return bundle;
}

}  // namespace logstep
