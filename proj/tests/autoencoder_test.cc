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

#include "redungroup/autoencoder.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "redungroup/errors.h"
#include "test_support.h"

namespace redungroup {
namespace {

Eigen::MatrixXd Gaussian(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

Dataset AsNormalized(Eigen::MatrixXd values) {
  Dataset data;
  data.values = std::move(values);
  for (int c = 0; c < data.cols(); ++c) data.muscle_ids.push_back(c);
  data.normalized = true;
  return data;
}

// Rank-2 structure plus a little noise, z-scored.
Dataset LowRankData(int rows, uint64_t seed) {
  const Eigen::MatrixXd latent = Gaussian(rows, 2, seed);
  const Eigen::MatrixXd mix = Gaussian(2, 6, seed + 1);
  Eigen::MatrixXd values =
      (latent * mix).array().tanh().matrix() + 0.05 * Gaussian(rows, 6, seed + 2);
  for (int c = 0; c < values.cols(); ++c) {
    const double mean = values.col(c).mean();
    values.col(c).array() -= mean;
    values.col(c) /= std::sqrt(values.col(c).squaredNorm() / rows);
  }
  return AsNormalized(values);
}

MlpModel ZeroModel(int inputs, int latent, int hidden) {
  MlpModel model = InitModel(inputs, latent, hidden, 0);
  for (auto& w : model.params.weights) w.setZero();
  for (auto& b : model.params.biases) b.setZero();
  return model;
}

TEST(InitModel, LayerSizesAndParameterCount) {
  const MlpModel model = InitModel(28, 12, 300, 1);
  EXPECT_EQ(model.layer_sizes, (std::array<int, 5>{28, 300, 12, 300, 28}));
  EXPECT_EQ(model.params.weights[0].rows(), 300);
  EXPECT_EQ(model.params.weights[0].cols(), 28);
  EXPECT_EQ(model.params.weights[3].rows(), 28);
  EXPECT_EQ(model.parameter_count(), AutoencoderParameterCount(28, 300, 12));
  EXPECT_EQ(AutoencoderParameterCount(28, 300, 12),
            300u * (2 * 28 + 2 * 12 + 6) + 3 * 12 + 28);
}

TEST(InitModel, SeedDeterminesParameters) {
  const MlpModel a = InitModel(10, 3, 16, 5);
  const MlpModel b = InitModel(10, 3, 16, 5);
  const MlpModel c = InitModel(10, 3, 16, 6);
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(a.params.weights[l], b.params.weights[l]);
    EXPECT_EQ(a.params.biases[l], b.params.biases[l]);
  }
  EXPECT_NE(a.params.weights[0], c.params.weights[0]);
}

TEST(InitModel, WeightsWithinFanInBound) {
  const MlpModel model = InitModel(28, 12, 300, 2);
  for (int l = 0; l < 4; ++l) {
    const double bound = 1.0 / std::sqrt(model.layer_sizes[l]);
    EXPECT_LE(model.params.weights[l].cwiseAbs().maxCoeff(), bound);
  }
}

TEST(InitModel, BottleneckMustShrink) {
  EXPECT_THROW(InitModel(6, 6, 10, 0), InvalidArgumentError);
  EXPECT_THROW(InitModel(6, 0, 10, 0), InvalidArgumentError);
  EXPECT_THROW(InitModel(6, 2, 0, 0), InvalidArgumentError);
}

TEST(Forward, EvalIsPureAndBatchIndependent) {
  MlpModel model = testing::RandomSmallModel(6, 2, 8, 3);
  const Eigen::MatrixXd x = Gaussian(20, 6, 4);
  const Eigen::MatrixXd once = Forward(model, x, ForwardMode::kEval);
  EXPECT_EQ(once, Forward(model, x, ForwardMode::kEval));
  for (int r = 0; r < x.rows(); ++r) {
    const Eigen::MatrixXd alone = Reconstruct(model, x.row(r));
    EXPECT_LE((alone - once.row(r)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, ZeroModelOutputsZeros) {
  MlpModel model = ZeroModel(5, 2, 4);
  const Eigen::MatrixXd x = Gaussian(7, 5, 1);
  EXPECT_EQ(Forward(model, x, ForwardMode::kEval), Eigen::MatrixXd::Zero(7, 5));
  EXPECT_EQ(Forward(model, x, ForwardMode::kTrain), Eigen::MatrixXd::Zero(7, 5));
}

TEST(Forward, TrainModeNeedsTwoRows) {
  MlpModel model = InitModel(4, 2, 3, 0);
  EXPECT_THROW(Forward(model, Gaussian(1, 4, 0), ForwardMode::kTrain),
               InvalidArgumentError);
  EXPECT_THROW(Forward(model, Gaussian(3, 5, 0), ForwardMode::kEval),
               InvalidArgumentError);
}

TEST(Forward, TrainModeUpdatesRunningStats) {
  MlpModel model = InitModel(4, 2, 3, 0);
  const Eigen::MatrixXd x = Gaussian(10, 4, 1);
  Forward(model, x, ForwardMode::kTrain);
  EXPECT_NE(model.running_mean[0], Eigen::VectorXd::Zero(3));
  EXPECT_NE(model.running_var[0], Eigen::VectorXd::Ones(3));
}

TEST(Loss, ZeroOutputOnStandardizedDataIsAboutOne) {
  const MlpModel model = ZeroModel(6, 2, 4);
  const Dataset data = LowRankData(2000, 9);
  EXPECT_NEAR(ReconstructionLoss(model, data.values), 1.0, 1e-9);
}

TEST(Loss, NonNegative) {
  const MlpModel model = testing::RandomSmallModel(6, 2, 8, 5);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_GE(ReconstructionLoss(model, Gaussian(30, 6, seed)), 0.0);
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  const MlpModel model = testing::RandomSmallModel(6, 2, 5, 11);
  const testing::GradientCheck check =
      testing::CheckGradients(model, Gaussian(12, 6, 12), 1e-5);
  EXPECT_EQ(check.checked, model.parameter_count());
  EXPECT_LT(check.max_error, 1e-4) << "worst block " << check.worst_block;
}

TEST(Gradient, BatchOfOneRejected) {
  const MlpModel model = InitModel(6, 2, 5, 0);
  MlpParameters grad;
  EXPECT_THROW(LossAndGradient(model, Gaussian(1, 6, 0), &grad),
               InvalidArgumentError);
}

TEST(Train, OneEpochReportShape) {
  const auto [train, test] = SplitTrainTest(LowRankData(250, 1), 0.8, 2);
  TrainConfig config;
  config.epochs = 1;
  config.batch_size = 20;
  const TrainResult result = Train(InitModel(6, 2, 16, 0), train, test, config);
  EXPECT_EQ(result.report.train_loss.size(), 1u);
  EXPECT_EQ(result.report.test_loss.size(), 1u);
  EXPECT_EQ(result.report.best_epoch, 0);
}

TEST(Train, LearnsLowRankStructureDeterministically) {
  const auto [train, test] = SplitTrainTest(LowRankData(1000, 3), 0.8, 4);
  TrainConfig config;
  config.epochs = 30;
  config.batch_size = 50;
  config.seed = 8;
  const TrainResult a = Train(InitModel(6, 2, 32, 1), train, test, config);
  const TrainResult b = Train(InitModel(6, 2, 32, 1), train, test, config);
  EXPECT_EQ(a.report.test_loss, b.report.test_loss);
  EXPECT_LT(a.report.best_test_loss(), 0.5 * a.report.test_loss.front());
  EXPECT_LT(a.report.best_test_loss(), 0.2);
  // The returned snapshot is the best epoch.
  EXPECT_DOUBLE_EQ(ReconstructionLoss(a.model, test.values),
                   a.report.best_test_loss());
  for (double loss : a.report.test_loss) {
    EXPECT_GE(loss, a.report.best_test_loss());
  }
}

TEST(Train, RejectsRawOrNonFiniteData) {
  auto [train, test] = SplitTrainTest(LowRankData(120, 1), 0.8, 2);
  TrainConfig config;
  config.epochs = 1;
  Dataset raw = train;
  raw.normalized = false;
  EXPECT_THROW(Train(InitModel(6, 2, 8, 0), raw, test, config),
               InvalidArgumentError);
  train.values(3, 2) = std::nan("");
  EXPECT_THROW(Train(InitModel(6, 2, 8, 0), train, test, config),
               TrainingDivergedError);
}

TEST(FunctionalMatrix, IdentitySecondFactor) {
  MlpModel model = InitModel(2, 1, 2, 0);
  model.params.weights[2] << 1, 2;
  model.params.weights[3] = Eigen::Matrix2d::Identity();
  const Eigen::MatrixXd w = ExtractFunctionalMatrix(model);
  ASSERT_EQ(w.rows(), 1);
  ASSERT_EQ(w.cols(), 2);
  EXPECT_DOUBLE_EQ(w(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(w(0, 1), 2.0);
}

TEST(FunctionalMatrix, HandProduct) {
  MlpModel model = InitModel(2, 1, 2, 0);
  model.params.weights[2] << 1, 2;
  // Stored output x hidden; hidden -> output factor [[3,5],[4,6]].
  model.params.weights[3] << 3, 4, 5, 6;
  const Eigen::MatrixXd w = ExtractFunctionalMatrix(model);
  EXPECT_DOUBLE_EQ(w(0, 0), 11.0);
  EXPECT_DOUBLE_EQ(w(0, 1), 17.0);
}

TEST(FunctionalMatrix, ShapeAndFold) {
  MlpModel model = testing::RandomSmallModel(9, 3, 7, 2);
  EXPECT_EQ(ExtractFunctionalMatrix(model).rows(), 3);
  EXPECT_EQ(ExtractFunctionalMatrix(model).cols(), 9);
  model.running_var[2].setConstant(4.0 - kBatchNormEpsilon);
  model.params.gammas[2].setConstant(1.0);
  EXPECT_TRUE(ExtractFunctionalMatrix(model, true)
                  .isApprox(0.5 * ExtractFunctionalMatrix(model)));
}

TEST(Serialization, ModelJsonRoundTrip) {
  MlpModel model = testing::RandomSmallModel(6, 2, 5, 4);
  model.running_var[1].setConstant(2.5);
  const MlpModel back = ModelFromJson(ModelToJson(model));
  EXPECT_EQ(back.layer_sizes, model.layer_sizes);
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(back.params.weights[l], model.params.weights[l]);
  }
  EXPECT_EQ(back.running_var[1], model.running_var[1]);
  const Eigen::MatrixXd x = Gaussian(4, 6, 1);
  EXPECT_EQ(Reconstruct(back, x), Reconstruct(model, x));
}

TEST(Serialization, TrainConfigRoundTrip) {
  TrainConfig config;
  config.batch_size = 50;
  config.epochs = 3000;
  config.seed = 42;
  const TrainConfig back = TrainConfigFromJson(TrainConfigToJson(config));
  EXPECT_EQ(back.batch_size, 50);
  EXPECT_EQ(back.epochs, 3000);
  EXPECT_EQ(back.seed, 42u);
}

}  // namespace
}  // namespace redungroup
