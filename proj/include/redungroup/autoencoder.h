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

#ifndef REDUNGROUP_AUTOENCODER_H_
#define REDUNGROUP_AUTOENCODER_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "redungroup/dataset.h"

namespace redungroup {

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

// Trainable tensors of the 5-layer autoencoder M-H-Nz-H-M. Weight matrices
// are stored out x in. Layers 0..2 are followed by batch norm and tanh; the
// output layer is linear.
struct MlpParameters {
  std::array<Eigen::MatrixXd, 4> weights;
  std::array<Eigen::VectorXd, 4> biases;
  std::array<Eigen::VectorXd, 3> gammas;
  std::array<Eigen::VectorXd, 3> betas;

  // Same shapes, all zeros.
  MlpParameters ZerosLike() const;
  // Every tensor as a flat span, in a fixed order.
  std::vector<std::span<double>> Blocks();
  size_t size() const;
};

struct MlpModel {
  std::array<int, 5> layer_sizes{};
  MlpParameters params;
  std::array<Eigen::VectorXd, 3> running_mean;
  std::array<Eigen::VectorXd, 3> running_var;

  int input_size() const { return layer_sizes[0]; }
  int hidden_size() const { return layer_sizes[1]; }
  int latent_size() const { return layer_sizes[2]; }
  size_t parameter_count() const { return params.size(); }
};

// Trainable parameters of a model with the given sizes, without building it.
size_t AutoencoderParameterCount(int inputs, int hidden, int latent);

// Weights and biases uniform in +-1/sqrt(fan_in); gamma = 1, beta = 0.
// Throws InvalidArgumentError unless 1 <= latent < inputs.
MlpModel InitModel(int inputs, int latent, int hidden, uint64_t seed);

enum class ForwardMode { kTrain, kEval };

// Rows of `batch` are samples. Train mode normalizes with batch statistics
// and updates the running statistics; it needs at least two rows.
Eigen::MatrixXd Forward(MlpModel& model, const Eigen::MatrixXd& batch,
                        ForwardMode mode);
// Eval-mode forward pass.
Eigen::MatrixXd Reconstruct(const MlpModel& model, const Eigen::MatrixXd& batch);

// Mean squared reconstruction error of `batch` in train mode (batch
// statistics) and its gradient with respect to every trainable parameter.
// Running statistics are left untouched.
double LossAndGradient(const MlpModel& model, const Eigen::MatrixXd& batch,
                       MlpParameters* gradient);

// Eval-mode mean squared error over all samples and channels.
double ReconstructionLoss(const MlpModel& model, const Eigen::MatrixXd& data);

struct TrainConfig {
  int batch_size = 100;
  int epochs = 300;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  int best_epoch = -1;  // 0-based index into the series

  double best_test_loss() const { return test_loss.at(best_epoch); }
  double best_train_loss() const { return train_loss.at(best_epoch); }
};

struct TrainResult {
  MlpModel model;  // snapshot at the best test epoch
  TrainReport report;
};

// Mini-batch Adam on the mean squared reconstruction error. Train loss is the
// sample-weighted mean of the minibatch losses of each epoch; test loss is
// evaluated in eval mode after every epoch. A trailing batch of one row is
// dropped. Throws TrainingDivergedError on a non-finite loss.
TrainResult Train(const MlpModel& model, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config);

// W = (W_dec2 * W_dec1)^T with shape latent x inputs. With `fold_batchnorm`
// the decoder hidden batch-norm scale gamma/sqrt(var + eps) is folded in.
Eigen::MatrixXd ExtractFunctionalMatrix(const MlpModel& model,
                                        bool fold_batchnorm = false);

nlohmann::json ModelToJson(const MlpModel& model);
MlpModel ModelFromJson(const nlohmann::json& json);

void ExportTrainReportCsv(const TrainReport& report, const std::string& path);

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& json,
                                TrainConfig defaults = {});

}  // namespace redungroup

#endif  // REDUNGROUP_AUTOENCODER_H_
