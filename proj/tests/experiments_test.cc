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

#include "redungroup/experiments.h"

#include <random>

#include <gtest/gtest.h>

#include "redungroup/errors.h"
#include "redungroup/robot.h"
#include "test_support.h"

namespace redungroup {
namespace {

struct Fixture {
  RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  ExperimentInputs inputs;

  Fixture() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    inputs.functional.resize(12, 28);
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 28; ++c) inputs.functional(r, c) = unit(rng);
    }
    inputs.distances = SpatialDistanceMatrix(robot, SpreadPose(robot));
    inputs.truth = GroundTruth::FromRobot(robot);
  }
};

TrialsConfig SmallTrials(int trials) {
  TrialsConfig config;
  config.grouping.num_groups = 12;
  config.grouping.num_iterations = 3000;
  config.trials = trials;
  config.seed = 40;
  return config;
}

TEST(RunTrials, StatisticsMatchPerTrialReports) {
  const Fixture fixture;
  const auto modes = RunTrials(fixture.inputs, SmallTrials(4));
  ASSERT_EQ(modes.size(), 3u);
  for (const ModeTrials& mode : modes) {
    ASSERT_EQ(mode.results.size(), 4u);
    std::array<double, 3> mean{};
    for (int t = 0; t < 4; ++t) {
      const ConsistencyReport report =
          Consistency(mode.results[t].XGroups(), fixture.inputs.truth);
      EXPECT_EQ(mode.stats.trials[t][0], report.a0);
      EXPECT_EQ(mode.stats.trials[t][2], report.a2);
      for (int k = 0; k < 3; ++k) mean[k] += mode.stats.trials[t][k] / 4.0;
      EXPECT_TRUE(mode.results[t].all_minimums_met);
    }
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(mode.stats.mean[k], mean[k], 1e-9);
  }
}

TEST(RunTrials, SingleTrialHasZeroVariance) {
  const Fixture fixture;
  for (const ModeTrials& mode : RunTrials(fixture.inputs, SmallTrials(1))) {
    EXPECT_EQ(mode.stats.variance, (std::array<double, 3>{0, 0, 0}));
  }
}

// Each trial's graph noise depends only on the trial seed, not the mode.
TEST(RunTrials, ModesShareTheNoiseRealization) {
  const Fixture fixture;
  TrialsConfig config = SmallTrials(2);
  const auto all = RunTrials(fixture.inputs, config);
  config.modes = {EvalMode::kBoth};
  const auto both_only = RunTrials(fixture.inputs, config);
  for (int t = 0; t < 2; ++t) {
    EXPECT_EQ(all[2].results[t].labels, both_only[0].results[t].labels);
  }
}

TEST(RunTrials, ParallelMatchesSerial) {
  const Fixture fixture;
  TrialsConfig config = SmallTrials(3);
  const auto serial = RunTrials(fixture.inputs, config);
  config.jobs = 3;
  const auto parallel = RunTrials(fixture.inputs, config);
  EXPECT_EQ(ModeTrialsToJson(serial).dump(), ModeTrialsToJson(parallel).dump());
}

TEST(RunTrials, TableAndCsv) {
  const Fixture fixture;
  const auto modes = RunTrials(fixture.inputs, SmallTrials(2));
  const std::string table = TrialsTable(modes);
  EXPECT_NE(table.find("func"), std::string::npos);
  EXPECT_NE(table.find("both"), std::string::npos);
  testing::ScratchDir dir("trials");
  ExportTrialsCsv(modes, dir.Path("t.csv"));
  EXPECT_EQ(testing::ReadFile(dir.Path("t.csv")).rfind("mode,trial,A0,A1,A2\n", 0),
            0u);
}

TEST(Sweep, OneRowPerLatentSize) {
  const Fixture fixture;
  Dataset data =
      Normalize(SampleRandomPostures(fixture.robot, 400, 3)).first;
  const auto [train, test] = SplitTrainTest(data, 0.8, 1);
  AutoencoderSetup setup;
  setup.hidden = 16;
  setup.train.epochs = 2;
  setup.train.batch_size = 50;
  TrialsConfig trials = SmallTrials(2);
  trials.modes = {EvalMode::kFunc};
  trials.grouping.num_groups = 4;
  const std::vector<int> sizes = {4, 8, 12};
  const auto rows = SweepLatentSize(train, test, fixture.inputs.distances,
                                    fixture.inputs.truth, sizes, setup, trials);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].latent, 12);
  EXPECT_EQ(rows[0].stats.count(), 2);
  const auto again = SweepLatentSize(train, test, fixture.inputs.distances,
                                     fixture.inputs.truth, sizes, setup, trials);
  EXPECT_EQ(again[1].stats.trials, rows[1].stats.trials);
  EXPECT_EQ(again[1].best_test_loss, rows[1].best_test_loss);
  const std::vector<int> too_big = {28};
  EXPECT_THROW(SweepLatentSize(train, test, fixture.inputs.distances,
                               fixture.inputs.truth, too_big, setup, trials),
               InvalidArgumentError);
}

TEST(Retrain, PlanMeetsBudget) {
  const Fixture fixture;
  const auto& truth = fixture.inputs.truth;
  // Partition the muscles by their first truth group.
  std::vector<std::vector<int>> channels(truth.groups.size());
  std::vector<bool> taken(28, false);
  for (size_t g = 0; g < truth.groups.size(); ++g) {
    for (int m : truth.groups[g]) {
      if (!taken[m]) channels[g].push_back(m);
      taken[m] = true;
    }
  }
  const std::vector<int> latent(channels.size(), 1);
  const size_t full = AutoencoderParameterCount(28, 300, 12);
  const auto plans = PlanGroupedAutoencoders(channels, latent, full);
  size_t total = 0;
  for (const auto& plan : plans) {
    total += plan.parameters;
    EXPECT_EQ(plan.parameters,
              plan.hidden * (2 * plan.channels.size() + 2 * plan.latent + 6) +
                  3 * plan.latent + plan.channels.size());
  }
  EXPECT_LE(std::abs(static_cast<double>(total) - full) / full, 0.02);
  EXPECT_THROW(PlanGroupedAutoencoders({{0}}, {1}, full), InvalidArgumentError);
}

TEST(Retrain, SingleGroupReducesToFullModel) {
  const Fixture fixture;
  const Dataset data = SampleRandomPostures(fixture.robot, 600, 5);
  std::vector<int> all(28);
  std::iota(all.begin(), all.end(), 0);
  RetrainConfig config;
  config.low_data_count = 500;
  config.hidden = 24;
  config.train.epochs = 15;
  config.train.batch_size = 50;
  config.seed = 2;
  const RetrainReport report = GroupedRetrain(data, {all}, {6}, config);
  ASSERT_EQ(report.plans.size(), 1u);
  EXPECT_EQ(report.plans[0].hidden, 24);
  EXPECT_EQ(report.budget_error(), 0.0);
  EXPECT_EQ(report.grouped_train_loss.size(), 15u);
  EXPECT_NEAR(report.grouped_best_test, report.full_best_test,
              0.5 * report.full_best_test);
}

TEST(Retrain, RejectsBadPartitions) {
  const Fixture fixture;
  const Dataset data = SampleRandomPostures(fixture.robot, 100, 5);
  RetrainConfig config;
  config.low_data_count = 50;
  EXPECT_THROW(GroupedRetrain(data, {{0, 1}}, {1}, config), InvalidArgumentError);
  std::vector<int> all(28);
  std::iota(all.begin(), all.end(), 0);
  config.low_data_count = 1000;
  EXPECT_THROW(GroupedRetrain(data, {all}, {2}, config), InvalidArgumentError);
}

TEST(Retrain, SplitFromResultSeparatesVertexKinds) {
  GroupingResult result;
  result.num_x = 4;
  result.members = {{0, 1, 4}, {2, 3, 5, 6}};
  std::vector<std::vector<int>> channels;
  std::vector<int> latent;
  SplitFromResult(result, &channels, &latent);
  EXPECT_EQ(channels, (std::vector<std::vector<int>>{{0, 1}, {2, 3}}));
  EXPECT_EQ(latent, (std::vector<int>{1, 2}));
}

}  // namespace
}  // namespace redungroup
