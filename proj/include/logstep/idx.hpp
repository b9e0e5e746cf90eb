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
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "logstep/error.hpp"
#include "logstep/problems.hpp"

namespace logstep {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

class IdxParseError : public InputError {
 public:
  enum class Kind { io, bad_magic, truncated, dim_mismatch };

  IdxParseError(Kind kind, const std::string& what) : InputError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Reads the first max_n records of an IDX image/label pair. Pixels are
/// rescaled to [0, 1] by dividing by 255. max_n <= 0 reads everything.
DatasetSplit load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                      int max_n);

/// Writers for test fixtures: big-endian header followed by raw bytes.
void write_idx_images(const std::filesystem::path& path, int rows, int cols, std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// Train and validation splits from the standard FashionMNIST file names in
/// `dir` (train-*-idx?-ubyte, t10k-*-idx?-ubyte). nullopt when files are absent.
std::optional<std::pair<DatasetSplit, DatasetSplit>> load_fashion_mnist(const std::filesystem::path& dir,
                                                                        int max_train, int max_val);

}  // namespace logstep
