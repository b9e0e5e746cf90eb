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

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "logstep/error.hpp"
#include "logstep/harness.hpp"

namespace logstep {

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::string format_trace_csv(std::span<const TraceRow> rows) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.seed, r.global_epoch, r.cycle, r.t, r.eta,
                       r.train_loss, r.grad_norm_sq, r.val_metric);
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << format_trace_csv(rows);
  if (!out) throw InputError(fmt::format("write to {} failed", path.string()));
}

namespace {

template <typename T>
T parse_integer(std::string_view field, std::size_t line) {
  T value{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size()) {
    throw InputError(fmt::format("trace line {}: bad integer '{}'", line, field));
  }
  return value;
}

double parse_real(std::string_view field, std::size_t line) {
  // strtod handles inf/nan spellings written by fmt.
  const std::string copy(field);
  char* end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw InputError(fmt::format("trace line {}: bad number '{}'", line, field));
  }
  return value;
}

}  // namespace

std::vector<TraceRow> parse_trace_csv(std::string_view text) {
  std::vector<TraceRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kTraceCsvHeader) throw InputError(fmt::format("unexpected trace header '{}'", line));
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 8) throw InputError(fmt::format("trace line {}: expected 8 fields, got {}", line_no, fields.size()));
    TraceRow row;
    row.seed = parse_integer<std::uint64_t>(fields[0], line_no);
    row.global_epoch = parse_integer<long long>(fields[1], line_no);
    row.cycle = parse_integer<int>(fields[2], line_no);
    row.t = parse_integer<int>(fields[3], line_no);
    row.eta = parse_real(fields[4], line_no);
    row.train_loss = parse_real(fields[5], line_no);
    row.grad_norm_sq = parse_real(fields[6], line_no);
    row.val_metric = parse_real(fields[7], line_no);
    rows.push_back(row);
  }
  if (line_no == 0) throw InputError("empty trace file");
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_trace_csv(buffer.str());
}

void write_dat(const std::filesystem::path& path, std::span<const std::string> columns,
               std::span<const std::vector<double>> data) {
  if (columns.size() != data.size()) throw InputError("column names and data differ in count");
  const std::size_t rows = data.empty() ? 0 : data.front().size();
  for (const auto& column : data) {
    if (column.size() != rows) throw InputError("dat columns differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << "#";
  for (const auto& name : columns) out << ' ' << name;
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) {
      if (c) out << ' ';
      out << format_double(data[c][r]);
    }
    out << '\n';
  }
}

}  // namespace logstep
