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
#include <array>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/idx.hpp"
#include "logstep/problems.hpp"

namespace logstep {

void DatasetSplit::validate() const {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw InputError(fmt::format("{} feature rows but {} labels", features.rows(), labels.size()));
  }
  if (n_classes < 1) throw InputError("dataset needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw InputError(fmt::format("label {} outside [0, {})", y, n_classes));
  }
}

DatasetSplit synth_classification(int n, int d, int n_classes, std::uint64_t seed) {
  if (n_classes < 1 || d < 1) throw DomainError("need at least one class and one feature");
  if (n < n_classes) throw DomainError(fmt::format("need n >= n_classes, got n={} classes={}", n, n_classes));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(0.2, 0.8);
  std::normal_distribution<double> noise(0.0, 0.1);

  FeatureMatrix means(n_classes, d);
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    for (Eigen::Index j = 0; j < d; ++j) means(c, j) = center(rng);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  DatasetSplit split;
  split.n_classes = n_classes;
  split.features.resize(n, d);
  split.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int y = order[static_cast<std::size_t>(i)] % n_classes;
    split.labels[static_cast<std::size_t>(i)] = y;
    for (Eigen::Index j = 0; j < d; ++j) split.features(i, j) = std::clamp(means(y, j) + noise(rng), 0.0, 1.0);
  }
  return split;
}

std::pair<DatasetSplit, DatasetSplit> split_head(const DatasetSplit& split, int head) {
  if (head < 0 || head > split.size()) throw DomainError(fmt::format("cannot take {} of {} samples", head, split.size()));
  DatasetSplit first;
  DatasetSplit rest;
  first.n_classes = rest.n_classes = split.n_classes;
  first.features = split.features.topRows(head);
  rest.features = split.features.bottomRows(split.size() - head);
  first.labels.assign(split.labels.begin(), split.labels.begin() + head);
  rest.labels.assign(split.labels.begin() + head, split.labels.end());
  return {std::move(first), std::move(rest)};
}

namespace {

using Kind = IdxParseError::Kind;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxParseError(Kind::io, fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw IdxParseError(Kind::truncated, fmt::format("{}: truncated header", path.string()));
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t value) {
  const std::array<char, 4> bytes = {static_cast<char>(value >> 24), static_cast<char>(value >> 16),
                                     static_cast<char>(value >> 8), static_cast<char>(value)};
  out.write(bytes.data(), bytes.size());
}

}  // namespace

DatasetSplit load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, int max_n) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);

  if (const auto magic = read_be32(images, 0, images_path); magic != kIdxImagesMagic) {
    throw IdxParseError(Kind::bad_magic, fmt::format("{}: image magic {:#010x}, expected {:#010x}",
                                                     images_path.string(), magic, kIdxImagesMagic));
  }
  if (const auto magic = read_be32(labels, 0, labels_path); magic != kIdxLabelsMagic) {
    throw IdxParseError(Kind::bad_magic, fmt::format("{}: label magic {:#010x}, expected {:#010x}",
                                                     labels_path.string(), magic, kIdxLabelsMagic));
  }
  const std::size_t n_images = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);
  if (n_images != n_labels) {
    throw IdxParseError(Kind::dim_mismatch, fmt::format("{} images but {} labels", n_images, n_labels));
  }
  if (rows == 0 || cols == 0) throw IdxParseError(Kind::dim_mismatch, "image dimensions must be positive");

  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + n_images * pixels) {
    throw IdxParseError(Kind::truncated, fmt::format("{}: expected {} pixel bytes, found {}", images_path.string(),
                                                     n_images * pixels, images.size() - 16));
  }
  if (labels.size() < 8 + n_labels) {
    throw IdxParseError(Kind::truncated, fmt::format("{}: expected {} label bytes, found {}", labels_path.string(),
                                                     n_labels, labels.size() - 8));
  }

  const std::size_t n = max_n > 0 ? std::min<std::size_t>(n_images, static_cast<std::size_t>(max_n)) : n_images;
  DatasetSplit split;
  split.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pixels));
  split.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pixels; ++j) {
      split.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = images[16 + i * pixels + j] / 255.0;
    }
    split.labels[i] = labels[8 + i];
    max_label = std::max(max_label, split.labels[i]);
  }
  split.n_classes = max_label + 1;
  return split;
}

void write_idx_images(const std::filesystem::path& path, int rows, int cols, std::span<const std::uint8_t> pixels) {
  const auto per_image = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (per_image == 0 || pixels.size() % per_image != 0) throw InputError("pixel count is not a multiple of rows*cols");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxParseError(Kind::io, fmt::format("cannot write {}", path.string()));
  put_be32(out, kIdxImagesMagic);
  put_be32(out, static_cast<std::uint32_t>(pixels.size() / per_image));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxParseError(Kind::io, fmt::format("cannot write {}", path.string()));
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

std::optional<std::pair<DatasetSplit, DatasetSplit>> load_fashion_mnist(const std::filesystem::path& dir,
                                                                        int max_train, int max_val) {
  const auto train_images = dir / "train-images-idx3-ubyte";
  const auto train_labels = dir / "train-labels-idx1-ubyte";
  const auto test_images = dir / "t10k-images-idx3-ubyte";
  const auto test_labels = dir / "t10k-labels-idx1-ubyte";
  for (const auto& path : {train_images, train_labels, test_images, test_labels}) {
    if (!std::filesystem::exists(path)) return std::nullopt;
  }
  auto train = load_idx(train_images, train_labels, max_train);
  auto val = load_idx(test_images, test_labels, max_val);
  // The dataset has ten classes even when a subset misses some of them.
  train.n_classes = val.n_classes = std::max({10, train.n_classes, val.n_classes});
  return std::make_pair(std::move(train), std::move(val));
}

}  // namespace logstep
