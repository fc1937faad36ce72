// Copyright 2026 The RedunGroup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "redungroup/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      break;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

template <typename T>
bool ParseNumber(std::string_view cell, T* out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

// Reads non-empty lines, remembering their 1-based line numbers.
std::vector<std::pair<int, std::string>> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (Trim(line).empty()) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

std::string FormatDouble(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

void Dataset::Validate() const {
  if (values.rows() < 1) throw InvalidArgumentError("dataset has no rows");
  if (values.cols() < 2) {
    throw InvalidArgumentError("dataset needs at least two channels");
  }
  if (static_cast<Eigen::Index>(muscle_ids.size()) != values.cols()) {
    throw InvalidArgumentError("muscle id count does not match column count");
  }
}

std::pair<Dataset, NormalizationStats> Normalize(const Dataset& dataset) {
  if (dataset.normalized) {
    throw InvalidArgumentError("dataset is already normalized");
  }
  dataset.Validate();
  const Eigen::Index rows = dataset.values.rows();
  const Eigen::Index cols = dataset.values.cols();
  NormalizationStats stats;
  stats.mean.resize(cols);
  stats.stddev.resize(cols);
  stats.constant.resize(cols);

  Dataset out;
  out.muscle_ids = dataset.muscle_ids;
  out.values.resize(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto column = dataset.values.col(c);
    const double mean = column.mean();
    const double var = (column.array() - mean).square().sum() /
                       static_cast<double>(rows);
    const double std = std::sqrt(var);
    stats.mean[c] = mean;
    stats.stddev[c] = std;
    stats.constant[c] = std < kConstantChannelStd;
    if (stats.constant[c]) {
      out.values.col(c).setZero();
    } else {
      out.values.col(c) = (column.array() - mean) / std;
    }
  }
  out.normalized = true;
  out.stats = stats;
  return {std::move(out), std::move(stats)};
}

Dataset Denormalize(const Dataset& dataset) {
  if (!dataset.normalized || !dataset.stats) {
    throw InvalidArgumentError("dataset is not normalized");
  }
  const NormalizationStats& stats = *dataset.stats;
  if (static_cast<Eigen::Index>(stats.mean.size()) != dataset.values.cols()) {
    throw InvalidArgumentError("normalization stats do not match dataset");
  }
  Dataset out;
  out.muscle_ids = dataset.muscle_ids;
  out.values.resize(dataset.values.rows(), dataset.values.cols());
  for (Eigen::Index c = 0; c < dataset.values.cols(); ++c) {
    const double scale = stats.constant[c] ? 0.0 : stats.stddev[c];
    out.values.col(c) = dataset.values.col(c).array() * scale + stats.mean[c];
  }
  return out;
}

Dataset SelectRows(const Dataset& dataset, const std::vector<int>& indices) {
  Dataset out;
  out.muscle_ids = dataset.muscle_ids;
  out.normalized = dataset.normalized;
  out.stats = dataset.stats;
  out.values.resize(static_cast<Eigen::Index>(indices.size()),
                    dataset.values.cols());
  for (size_t i = 0; i < indices.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) =
        dataset.values.row(indices[i]);
  }
  return out;
}

Dataset SelectColumns(const Dataset& dataset, const std::vector<int>& columns) {
  Dataset out;
  out.normalized = dataset.normalized;
  out.values.resize(dataset.values.rows(),
                    static_cast<Eigen::Index>(columns.size()));
  NormalizationStats stats;
  for (size_t i = 0; i < columns.size(); ++i) {
    const int c = columns[i];
    if (c < 0 || c >= dataset.cols()) {
      throw InvalidArgumentError("column index out of range");
    }
    out.values.col(static_cast<Eigen::Index>(i)) = dataset.values.col(c);
    out.muscle_ids.push_back(dataset.muscle_ids[c]);
    if (dataset.stats) {
      stats.mean.push_back(dataset.stats->mean[c]);
      stats.stddev.push_back(dataset.stats->stddev[c]);
      stats.constant.push_back(dataset.stats->constant[c]);
    }
  }
  if (dataset.stats) out.stats = std::move(stats);
  return out;
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& dataset,
                                           double train_fraction,
                                           uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgumentError("train fraction must lie in (0, 1)");
  }
  const int rows = dataset.rows();
  const int train_rows =
      static_cast<int>(std::lround(static_cast<double>(rows) * train_fraction));
  if (train_rows < 1 || train_rows >= rows) {
    throw InvalidArgumentError("train/test split leaves one side empty");
  }
  std::vector<int> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> train(order.begin(), order.begin() + train_rows);
  std::vector<int> test(order.begin() + train_rows, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {SelectRows(dataset, train), SelectRows(dataset, test)};
}

void ExportLengthsCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (size_t c = 0; c < dataset.muscle_ids.size(); ++c) {
    if (c > 0) out << ',';
    out << dataset.muscle_ids[c];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < dataset.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < dataset.values.cols(); ++c) {
      if (c > 0) out << ',';
      out << FormatDouble(dataset.values(r, c));
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing file: " + path);
}

Dataset ImportLengthsCsv(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty()) throw ParseError(path + ": empty file", 1, 0);

  Dataset dataset;
  std::set<int> seen;
  const auto header = SplitCommas(lines[0].second);
  for (size_t c = 0; c < header.size(); ++c) {
    int id = 0;
    const int column = static_cast<int>(c) + 1;
    if (!ParseNumber(header[c], &id)) {
      throw ParseError(path + ": row " + std::to_string(lines[0].first) +
                           ", column " + std::to_string(column) +
                           ": muscle id is not an integer",
                       lines[0].first, column);
    }
    if (!seen.insert(id).second) {
      throw ParseError(path + ": row " + std::to_string(lines[0].first) +
                           ", column " + std::to_string(column) +
                           ": duplicate muscle id " + std::to_string(id),
                       lines[0].first, column);
    }
    dataset.muscle_ids.push_back(id);
  }

  const Eigen::Index cols = static_cast<Eigen::Index>(header.size());
  dataset.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (size_t r = 1; r < lines.size(); ++r) {
    const int row = lines[r].first;
    const auto cells = SplitCommas(lines[r].second);
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                           std::to_string(cols) + " cells, found " +
                           std::to_string(cells.size()),
                       row, 0);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      double value = 0.0;
      if (!ParseNumber(cells[c], &value) || !std::isfinite(value)) {
        throw ParseError(path + ": row " + std::to_string(row) + ", column " +
                             std::to_string(c + 1) + ": not a number: '" +
                             std::string(cells[c]) + "'",
                         row, static_cast<int>(c + 1));
      }
      dataset.values(static_cast<Eigen::Index>(r - 1), c) = value;
    }
  }
  dataset.Validate();
  return dataset;
}

Eigen::MatrixXd ImportDistanceMatrix(const std::string& path,
                                     int expected_size,
                                     std::vector<std::string>* warnings) {
  const auto lines = ReadLines(path);
  const Eigen::Index n = static_cast<Eigen::Index>(lines.size());
  if (n == 0) throw ParseError(path + ": empty file", 1, 0);
  Eigen::MatrixXd raw(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const int row = lines[r].first;
    const auto cells = SplitCommas(lines[r].second);
    if (static_cast<Eigen::Index>(cells.size()) != n) {
      throw InvalidArgumentError(path + ": distance matrix is not square (row " +
                                 std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, " +
                                 std::to_string(n) + " rows)");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      double value = 0.0;
      if (!ParseNumber(cells[c], &value) || !std::isfinite(value)) {
        throw ParseError(path + ": row " + std::to_string(row) + ", column " +
                             std::to_string(c + 1) + ": not a number",
                         row, static_cast<int>(c + 1));
      }
      raw(r, c) = value;
    }
  }
  if (expected_size >= 0 && n != expected_size) {
    throw InvalidArgumentError(path + ": distance matrix is " +
                               std::to_string(n) + "x" + std::to_string(n) +
                               " but " + std::to_string(expected_size) +
                               " muscles were expected");
  }
  Eigen::MatrixXd sym = 0.5 * (raw + raw.transpose());
  sym.diagonal().setZero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(raw(i, j) - raw(j, i)) > 1e-6 && warnings != nullptr) {
        warnings->push_back("asymmetric distance at (" + std::to_string(i) +
                            ", " + std::to_string(j) + "): " +
                            FormatDouble(raw(i, j)) + " vs " +
                            FormatDouble(raw(j, i)));
      }
    }
  }
  return sym;
}

void ExportMatrixCsv(const Eigen::MatrixXd& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c > 0) out << ',';
      out << FormatDouble(matrix(r, c));
    }
    out << '\n';
  }
}

nlohmann::json StatsToJson(const NormalizationStats& stats) {
  nlohmann::json json;
  json["mean"] = stats.mean;
  json["stddev"] = stats.stddev;
  json["constant"] = stats.constant;
  return json;
}

NormalizationStats StatsFromJson(const nlohmann::json& json) {
  NormalizationStats stats;
  stats.mean = json.at("mean").get<std::vector<double>>();
  stats.stddev = json.at("stddev").get<std::vector<double>>();
  stats.constant = json.at("constant").get<std::vector<bool>>();
  if (stats.mean.size() != stats.stddev.size() ||
      stats.mean.size() != stats.constant.size()) {
    throw ParseError("normalization stats have inconsistent lengths", 0, 0);
  }
  return stats;
}

}  // namespace redungroup
