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

#ifndef REDUNGROUP_DATASET_H_
#define REDUNGROUP_DATASET_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace redungroup {

// Channels whose population standard deviation falls below this are treated
// as stuck sensors.
inline constexpr double kConstantChannelStd = 1e-9;

// Per-channel z-score statistics (population standard deviation).
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> constant;
};

// T x M matrix of muscle lengths, one sample per row, one channel per column.
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<int> muscle_ids;
  bool normalized = false;
  std::optional<NormalizationStats> stats;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }

  // Checks T >= 1, M >= 2 and that ids match the column count.
  void Validate() const;
};

// Z-scores every column. Constant columns become zero and are flagged.
// Throws InvalidArgumentError if `dataset` is already normalized.
std::pair<Dataset, NormalizationStats> Normalize(const Dataset& dataset);

// Inverse of Normalize using the stats stored on `dataset`.
Dataset Denormalize(const Dataset& dataset);

// Random row-level partition. The train side receives round(T * fraction)
// rows; rows keep their relative order inside each side.
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& dataset,
                                           double train_fraction,
                                           uint64_t seed);

// Returns the rows at `indices` (stats and flags carried over).
Dataset SelectRows(const Dataset& dataset, const std::vector<int>& indices);

// Returns the columns at `columns` (stats sliced accordingly).
Dataset SelectColumns(const Dataset& dataset, const std::vector<int>& columns);

// CSV with a header row of integer muscle ids and one sample per row.
// Values are written with 17 significant digits.
void ExportLengthsCsv(const Dataset& dataset, const std::string& path);
Dataset ImportLengthsCsv(const std::string& path);

// Reads a square CSV distance matrix (no header). The result is symmetrized
// as (D + D^T) / 2 with a zero diagonal. A message is appended to `warnings`
// for every pair whose asymmetry exceeds 1e-6. `expected_size` < 0 skips the
// size check.
Eigen::MatrixXd ImportDistanceMatrix(const std::string& path,
                                     int expected_size,
                                     std::vector<std::string>* warnings);
void ExportMatrixCsv(const Eigen::MatrixXd& matrix, const std::string& path);

nlohmann::json StatsToJson(const NormalizationStats& stats);
NormalizationStats StatsFromJson(const nlohmann::json& json);

}  // namespace redungroup

#endif  // REDUNGROUP_DATASET_H_
