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

#ifndef REDUNGROUP_PIPELINE_H_
#define REDUNGROUP_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "redungroup/autoencoder.h"
#include "redungroup/dataset.h"
#include "redungroup/experiments.h"
#include "redungroup/robot.h"

namespace redungroup {

// Stage offsets added to the top-level seed. Each stage can be rerun on its
// own with `seed + offset`.
enum SeedStage : uint64_t {
  kSeedRobot = 0,
  kSeedSample = 1,
  kSeedSplit = 2,
  kSeedInit = 3,
  kSeedTrain = 4,
  kSeedTrials = 5,
  kSeedRetrain = 6,
};

inline uint64_t StageSeed(uint64_t seed, SeedStage stage) {
  return seed + static_cast<uint64_t>(stage);
}

struct PipelineConfig {
  uint64_t seed = 0;
  SynthSpec robot;
  int samples = 100000;
  double train_fraction = 0.8;
  int latent = 12;
  int hidden = 300;
  TrainConfig train;
  PathCenter center = PathCenter::kArcLengthMidpoint;
  GraphBuildConfig graph;
  // num_groups <= 0 means one group per ground-truth group.
  GroupingConfig grouping{.num_groups = 0};
  std::vector<EvalMode> modes = {EvalMode::kFunc, EvalMode::kSpac,
                                 EvalMode::kBoth};
  int trials = 10;
  int jobs = 1;
};

nlohmann::json PipelineConfigToJson(const PipelineConfig& config);
// Missing keys keep the values of `defaults`.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& json,
                                      PipelineConfig defaults = {});

struct PipelineOutputs {
  RobotModel robot;
  Dataset normalized;
  NormalizationStats stats;
  MlpModel model;
  TrainReport report;
  Eigen::MatrixXd functional;
  Eigen::MatrixXd distances;
  GroundTruth truth;
  std::vector<ModeTrials> trials;
};

using ProgressFn = std::function<void(std::string_view)>;

// synth -> sample -> normalize -> train -> build graph -> trials -> eval.
PipelineOutputs RunPipeline(const PipelineConfig& config,
                            const ProgressFn& progress = {});

}  // namespace redungroup

#endif  // REDUNGROUP_PIPELINE_H_
