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

#include "redungroup/pipeline.h"

#include <utility>

#include "redungroup/errors.h"

namespace redungroup {

nlohmann::json PipelineConfigToJson(const PipelineConfig& config) {
  nlohmann::json json;
  json["seed"] = config.seed;
  json["robot"] = SynthSpecToJson(config.robot);
  json["samples"] = config.samples;
  json["train_fraction"] = config.train_fraction;
  json["autoencoder"] = {{"latent", config.latent},
                         {"hidden", config.hidden},
                         {"train", TrainConfigToJson(config.train)}};
  json["center"] = config.center == PathCenter::kArcLengthMidpoint
                       ? "midpoint"
                       : "centroid";
  json["graph"] = {{"noise_std", config.graph.noise_std},
                   {"abs_functional", config.graph.abs_functional},
                   {"fold_batchnorm", config.graph.fold_batchnorm}};
  json["grouping"] = GroupingConfigToJson(config.grouping);
  json["grouping"].erase("mode");
  json["grouping"].erase("seed");
  nlohmann::json modes = nlohmann::json::array();
  for (EvalMode mode : config.modes) modes.push_back(std::string(EvalModeName(mode)));
  json["modes"] = modes;
  json["trials"] = config.trials;
  json["jobs"] = config.jobs;
  return json;
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& json,
                                      PipelineConfig defaults) {
  PipelineConfig config = std::move(defaults);
  try {
    config.seed = json.value("seed", config.seed);
    if (json.contains("robot")) {
      config.robot = SynthSpecFromJson(json.at("robot"), config.robot);
    }
    config.samples = json.value("samples", config.samples);
    config.train_fraction = json.value("train_fraction", config.train_fraction);
    if (json.contains("autoencoder")) {
      const auto& ae = json.at("autoencoder");
      config.latent = ae.value("latent", config.latent);
      config.hidden = ae.value("hidden", config.hidden);
      if (ae.contains("train")) {
        config.train = TrainConfigFromJson(ae.at("train"), config.train);
      }
    }
    if (json.contains("center")) {
      const std::string center = json.at("center").get<std::string>();
      if (center == "midpoint") {
        config.center = PathCenter::kArcLengthMidpoint;
      } else if (center == "centroid") {
        config.center = PathCenter::kViaPointCentroid;
      } else {
        throw InvalidArgumentError("center must be 'midpoint' or 'centroid'");
      }
    }
    if (json.contains("graph")) {
      const auto& graph = json.at("graph");
      config.graph.noise_std = graph.value("noise_std", config.graph.noise_std);
      config.graph.abs_functional =
          graph.value("abs_functional", config.graph.abs_functional);
      config.graph.fold_batchnorm =
          graph.value("fold_batchnorm", config.graph.fold_batchnorm);
    }
    if (json.contains("grouping")) {
      config.grouping =
          GroupingConfigFromJson(json.at("grouping"), config.grouping);
    }
    if (json.contains("modes")) {
      config.modes.clear();
      for (const auto& mode : json.at("modes")) {
        config.modes.push_back(ParseEvalMode(mode.get<std::string>()));
      }
    }
    config.trials = json.value("trials", config.trials);
    config.jobs = json.value("jobs", config.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed pipeline config: ") + e.what(), 0,
                     0);
  }
  return config;
}

PipelineOutputs RunPipeline(const PipelineConfig& config,
                            const ProgressFn& progress) {
  auto note = [&progress](std::string_view message) {
    if (progress) progress(message);
  };
  PipelineOutputs out;
  SynthSpec spec = config.robot;
  spec.seed = StageSeed(config.seed, kSeedRobot);
  out.robot = BuildSyntheticRobot(spec);
  out.truth = GroundTruth::FromRobot(out.robot);
  note("robot: " + std::to_string(out.robot.num_muscles()) + " muscles, " +
       std::to_string(out.robot.num_joints()) + " joints");

  const Dataset raw = SampleRandomPostures(out.robot, config.samples,
                                           StageSeed(config.seed, kSeedSample));
  auto normalized = Normalize(raw);
  out.normalized = std::move(normalized.first);
  out.stats = std::move(normalized.second);
  const auto [train_set, test_set] = SplitTrainTest(
      out.normalized, config.train_fraction, StageSeed(config.seed, kSeedSplit));
  note("dataset: " + std::to_string(train_set.rows()) + " train / " +
       std::to_string(test_set.rows()) + " test rows");

  TrainConfig train = config.train;
  train.seed = StageSeed(config.seed, kSeedTrain);
  TrainResult trained = Train(
      InitModel(out.robot.num_muscles(), config.latent, config.hidden,
                StageSeed(config.seed, kSeedInit)),
      train_set, test_set, train);
  out.model = std::move(trained.model);
  out.report = std::move(trained.report);
  note("autoencoder: best test loss " +
       std::to_string(out.report.best_test_loss()) + " at epoch " +
       std::to_string(out.report.best_epoch + 1));

  out.functional =
      ExtractFunctionalMatrix(out.model, config.graph.fold_batchnorm);
  out.distances = SpatialDistanceMatrix(out.robot, SpreadPose(out.robot),
                                        config.center);

  TrialsConfig trials;
  trials.graph = config.graph;
  trials.grouping = config.grouping;
  if (trials.grouping.num_groups <= 0) {
    trials.grouping.num_groups = static_cast<int>(out.truth.groups.size());
  }
  trials.modes = config.modes;
  trials.trials = config.trials;
  trials.seed = StageSeed(config.seed, kSeedTrials);
  trials.jobs = config.jobs;
  out.trials = RunTrials({out.functional, out.distances, out.truth}, trials);
  return out;
}

}  // namespace redungroup
