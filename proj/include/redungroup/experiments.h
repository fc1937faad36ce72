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

#ifndef REDUNGROUP_EXPERIMENTS_H_
#define REDUNGROUP_EXPERIMENTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "redungroup/autoencoder.h"
#include "redungroup/dataset.h"
#include "redungroup/evaluation.h"
#include "redungroup/grouping.h"
#include "redungroup/relational_graph.h"

namespace redungroup {

// What the trials share: one trained autoencoder's functional matrix, the
// spatial distances and the reference grouping.
struct ExperimentInputs {
  Eigen::MatrixXd functional;  // latent x channels
  Eigen::MatrixXd distances;   // channels x channels
  GroundTruth truth;
};

struct TrialsConfig {
  GraphBuildConfig graph;
  GroupingConfig grouping;
  std::vector<EvalMode> modes = {EvalMode::kFunc, EvalMode::kSpac,
                                 EvalMode::kBoth};
  int trials = 10;
  uint64_t seed = 0;
  int jobs = 1;
};

struct ModeTrials {
  EvalMode mode = EvalMode::kBoth;
  TrialStats stats;
  std::vector<GroupingResult> results;  // one per trial
};

// Trial t builds the graph with noise seed `seed + t` and groups it with
// seed `seed + t` in every mode, so modes see the same noise realization.
std::vector<ModeTrials> RunTrials(const ExperimentInputs& inputs,
                                  const TrialsConfig& config);

struct AutoencoderSetup {
  int hidden = 300;
  TrainConfig train;
  uint64_t init_seed = 0;
};

struct SweepRow {
  int latent = 0;
  double best_test_loss = 0.0;
  TrialStats stats;
};

// Trains one autoencoder per latent size on the same split and runs the
// trials in `trials.grouping.mode` (or the first of `trials.modes`).
std::vector<SweepRow> SweepLatentSize(const Dataset& train_set,
                                      const Dataset& test_set,
                                      const Eigen::MatrixXd& distances,
                                      const GroundTruth& truth,
                                      std::span<const int> latent_sizes,
                                      const AutoencoderSetup& setup,
                                      const TrialsConfig& trials);

struct RetrainConfig {
  int low_data_count = 1000;
  double train_fraction = 0.8;
  int hidden = 300;
  TrainConfig train;
  uint64_t seed = 0;
  double budget_tolerance = 0.02;
};

// One per-group autoencoder of the split model.
struct GroupPlan {
  std::vector<int> channels;
  int latent = 0;
  int hidden = 0;
  size_t parameters = 0;
};

struct RetrainReport {
  TrainReport full;
  std::vector<TrainReport> groups;
  std::vector<GroupPlan> plans;
  size_t full_parameters = 0;
  size_t grouped_parameters = 0;
  // Channel-count weighted averages of the per-group curves.
  std::vector<double> grouped_train_loss;
  std::vector<double> grouped_test_loss;
  // Each network at its own best test epoch.
  double full_best_train = 0.0;
  double full_best_test = 0.0;
  double grouped_best_train = 0.0;
  double grouped_best_test = 0.0;

  double full_gap() const { return full_best_test - full_best_train; }
  double grouped_gap() const { return grouped_best_test - grouped_best_train; }
  double budget_error() const;
};

// Hidden widths proportional to channel count (largest remainder) with the
// total parameter count matched to the full model as closely as possible.
std::vector<GroupPlan> PlanGroupedAutoencoders(
    const std::vector<std::vector<int>>& channel_groups,
    const std::vector<int>& latent_counts, size_t full_parameters);

// Trains the full autoencoder and the grouped split on a random subsample of
// `dataset` and compares their loss curves. Groups need >= 2 channels and
// >= 1 latent unit.
RetrainReport GroupedRetrain(const Dataset& dataset,
                             const std::vector<std::vector<int>>& channel_groups,
                             const std::vector<int>& latent_counts,
                             const RetrainConfig& config);

// Channel and latent-unit split implied by a grouping result.
void SplitFromResult(const GroupingResult& result,
                     std::vector<std::vector<int>>* channel_groups,
                     std::vector<int>* latent_counts);

nlohmann::json ModeTrialsToJson(const std::vector<ModeTrials>& trials);
std::string TrialsTable(const std::vector<ModeTrials>& trials);
void ExportTrialsCsv(const std::vector<ModeTrials>& trials,
                     const std::string& path);
void ExportSweepCsv(const std::vector<SweepRow>& rows, const std::string& path);
void ExportRetrainCsv(const RetrainReport& report, const std::string& path);
nlohmann::json RetrainToJson(const RetrainReport& report);

}  // namespace redungroup

#endif  // REDUNGROUP_EXPERIMENTS_H_
