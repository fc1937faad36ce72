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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Rows evaluated at once in eval mode; bounds the activation memory.
constexpr Eigen::Index kEvalChunk = 4096;

struct NormLayerCache {
  MatrixXd xhat;       // normalized pre-activation
  RowVectorXd inv_std;
  RowVectorXd mean;
  RowVectorXd var;     // biased batch variance
  MatrixXd output;     // tanh output
};

struct ForwardCache {
  std::array<NormLayerCache, 3> hidden;
  MatrixXd output;
};

MatrixXd Affine(const MatrixXd& input, const MatrixXd& weight,
                const VectorXd& bias) {
  MatrixXd out = input * weight.transpose();
  out.rowwise() += bias.transpose();
  return out;
}

// Train-mode forward pass keeping everything backprop needs.
ForwardCache ForwardWithCache(const MlpParameters& params, const MatrixXd& x) {
  const double rows = static_cast<double>(x.rows());
  ForwardCache cache;
  const MatrixXd* input = &x;
  for (int l = 0; l < 3; ++l) {
    NormLayerCache& layer = cache.hidden[l];
    MatrixXd pre = Affine(*input, params.weights[l], params.biases[l]);
    layer.mean = pre.colwise().mean();
    pre.rowwise() -= layer.mean;
    layer.var = pre.array().square().colwise().sum() / rows;
    layer.inv_std = (layer.var.array() + kBatchNormEpsilon).rsqrt();
    layer.xhat = pre.array().rowwise() * layer.inv_std.array();
    MatrixXd scaled = layer.xhat.array().rowwise() *
                      params.gammas[l].transpose().array();
    scaled.rowwise() += params.betas[l].transpose();
    layer.output = scaled.array().tanh();
    input = &layer.output;
  }
  cache.output = Affine(*input, params.weights[3], params.biases[3]);
  return cache;
}

MatrixXd EvalForward(const MlpModel& model, const MatrixXd& x) {
  const MlpParameters& params = model.params;
  MatrixXd activation = x;
  for (int l = 0; l < 3; ++l) {
    MatrixXd pre = Affine(activation, params.weights[l], params.biases[l]);
    const RowVectorXd scale =
        (params.gammas[l].array() /
         (model.running_var[l].array() + kBatchNormEpsilon).sqrt())
            .transpose();
    const RowVectorXd shift =
        params.betas[l].transpose().array() -
        model.running_mean[l].transpose().array() * scale.array();
    pre = pre.array().rowwise() * scale.array();
    pre.rowwise() += shift;
    activation = pre.array().tanh();
  }
  return Affine(activation, params.weights[3], params.biases[3]);
}

void UpdateRunningStats(MlpModel& model, const ForwardCache& cache,
                        Eigen::Index rows) {
  const double unbiased = static_cast<double>(rows) / (rows - 1.0);
  for (int l = 0; l < 3; ++l) {
    model.running_mean[l] =
        kBatchNormMomentum * model.running_mean[l] +
        (1.0 - kBatchNormMomentum) * cache.hidden[l].mean.transpose();
    model.running_var[l] =
        kBatchNormMomentum * model.running_var[l] +
        (1.0 - kBatchNormMomentum) * unbiased *
            cache.hidden[l].var.transpose();
  }
}

double Backward(const MlpParameters& params, const MatrixXd& x,
                const ForwardCache& cache, MlpParameters* grad) {
  const double rows = static_cast<double>(x.rows());
  const MatrixXd diff = cache.output - x;
  const double loss = diff.squaredNorm() / diff.size();

  MatrixXd delta = diff * (2.0 / static_cast<double>(diff.size()));
  grad->weights[3].noalias() = delta.transpose() * cache.hidden[2].output;
  grad->biases[3] = delta.colwise().sum().transpose();
  MatrixXd upstream = delta * params.weights[3];

  for (int l = 2; l >= 0; --l) {
    const NormLayerCache& layer = cache.hidden[l];
    // Through tanh.
    const MatrixXd d_norm =
        upstream.array() * (1.0 - layer.output.array().square());
    grad->gammas[l] =
        (d_norm.array() * layer.xhat.array()).colwise().sum().transpose();
    grad->betas[l] = d_norm.colwise().sum().transpose();
    // Through batch norm.
    const MatrixXd d_xhat =
        d_norm.array().rowwise() * params.gammas[l].transpose().array();
    const RowVectorXd sum_dxhat = d_xhat.colwise().sum();
    const RowVectorXd sum_dxhat_xhat =
        (d_xhat.array() * layer.xhat.array()).colwise().sum();
    MatrixXd d_pre = d_xhat * rows;
    d_pre.rowwise() -= sum_dxhat;
    d_pre -= (layer.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
    d_pre = d_pre.array().rowwise() * (layer.inv_std.array() / rows);

    const MatrixXd& input = l == 0 ? x : cache.hidden[l - 1].output;
    grad->weights[l].noalias() = d_pre.transpose() * input;
    grad->biases[l] = d_pre.colwise().sum().transpose();
    if (l > 0) upstream = d_pre * params.weights[l];
  }
  return loss;
}

void CheckBatch(const MlpModel& model, const MatrixXd& batch) {
  if (batch.cols() != model.input_size()) {
    throw InvalidArgumentError("batch has " + std::to_string(batch.cols()) +
                               " columns, model expects " +
                               std::to_string(model.input_size()));
  }
}

class Adam {
 public:
  Adam(const MlpParameters& like, const TrainConfig& config)
      : config_(config), first_(like.ZerosLike()), second_(like.ZerosLike()) {}

  void Step(MlpParameters& params, MlpParameters& grad) {
    ++step_;
    const double correction1 = 1.0 - std::pow(config_.beta1, step_);
    const double correction2 = 1.0 - std::pow(config_.beta2, step_);
    auto param_blocks = params.Blocks();
    auto grad_blocks = grad.Blocks();
    auto first_blocks = first_.Blocks();
    auto second_blocks = second_.Blocks();
    for (size_t b = 0; b < param_blocks.size(); ++b) {
      const Eigen::Index n = static_cast<Eigen::Index>(param_blocks[b].size());
      Eigen::Map<Eigen::ArrayXd> p(param_blocks[b].data(), n);
      Eigen::Map<Eigen::ArrayXd> g(grad_blocks[b].data(), n);
      Eigen::Map<Eigen::ArrayXd> m(first_blocks[b].data(), n);
      Eigen::Map<Eigen::ArrayXd> v(second_blocks[b].data(), n);
      m = config_.beta1 * m + (1.0 - config_.beta1) * g;
      v = config_.beta2 * v + (1.0 - config_.beta2) * g.square();
      p -= config_.learning_rate * (m / correction1) /
           ((v / correction2).sqrt() + config_.epsilon);
    }
  }

 private:
  TrainConfig config_;
  MlpParameters first_;
  MlpParameters second_;
  int step_ = 0;
};

nlohmann::json FlattenRowMajor(const MatrixXd& matrix) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(matrix.size()));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) flat.push_back(matrix(r, c));
  }
  return flat;
}

MatrixXd UnflattenRowMajor(const nlohmann::json& json, int rows, int cols) {
  const auto flat = json.get<std::vector<double>>();
  if (flat.size() != static_cast<size_t>(rows) * cols) {
    throw ParseError("weight array has the wrong length", 0, 0);
  }
  MatrixXd matrix(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) matrix(r, c) = flat[r * cols + c];
  }
  return matrix;
}

VectorXd VectorFromJson(const nlohmann::json& json, int size) {
  const auto values = json.get<std::vector<double>>();
  if (values.size() != static_cast<size_t>(size)) {
    throw ParseError("vector has the wrong length", 0, 0);
  }
  return Eigen::Map<const VectorXd>(values.data(), size);
}

std::vector<double> ToStd(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

MlpParameters MlpParameters::ZerosLike() const {
  MlpParameters zeros;
  for (int l = 0; l < 4; ++l) {
    zeros.weights[l] = MatrixXd::Zero(weights[l].rows(), weights[l].cols());
    zeros.biases[l] = VectorXd::Zero(biases[l].size());
  }
  for (int l = 0; l < 3; ++l) {
    zeros.gammas[l] = VectorXd::Zero(gammas[l].size());
    zeros.betas[l] = VectorXd::Zero(betas[l].size());
  }
  return zeros;
}

std::vector<std::span<double>> MlpParameters::Blocks() {
  std::vector<std::span<double>> blocks;
  auto add = [&blocks](auto& tensor) {
    blocks.emplace_back(tensor.data(), static_cast<size_t>(tensor.size()));
  };
  for (int l = 0; l < 4; ++l) {
    add(weights[l]);
    add(biases[l]);
    if (l < 3) {
      add(gammas[l]);
      add(betas[l]);
    }
  }
  return blocks;
}

size_t MlpParameters::size() const {
  size_t total = 0;
  for (int l = 0; l < 4; ++l) total += weights[l].size() + biases[l].size();
  for (int l = 0; l < 3; ++l) total += gammas[l].size() + betas[l].size();
  return total;
}

size_t AutoencoderParameterCount(int inputs, int hidden, int latent) {
  const std::array<size_t, 5> sizes = {
      static_cast<size_t>(inputs), static_cast<size_t>(hidden),
      static_cast<size_t>(latent), static_cast<size_t>(hidden),
      static_cast<size_t>(inputs)};
  size_t total = 0;
  for (int l = 0; l < 4; ++l) {
    total += sizes[l] * sizes[l + 1] + sizes[l + 1];
    if (l < 3) total += 2 * sizes[l + 1];
  }
  return total;
}

MlpModel InitModel(int inputs, int latent, int hidden, uint64_t seed) {
  if (latent < 1 || latent >= inputs) {
    throw InvalidArgumentError("latent size must satisfy 1 <= latent < inputs (" +
                               std::to_string(latent) + " vs " +
                               std::to_string(inputs) + ")");
  }
  if (hidden < 1) throw InvalidArgumentError("hidden size must be positive");
  MlpModel model;
  model.layer_sizes = {inputs, hidden, latent, hidden, inputs};
  std::mt19937_64 rng(seed);
  for (int l = 0; l < 4; ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    MatrixXd weight(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) weight(r, c) = uniform(rng);
    }
    VectorXd bias(fan_out);
    for (int r = 0; r < fan_out; ++r) bias[r] = uniform(rng);
    model.params.weights[l] = std::move(weight);
    model.params.biases[l] = std::move(bias);
    if (l < 3) {
      model.params.gammas[l] = VectorXd::Ones(fan_out);
      model.params.betas[l] = VectorXd::Zero(fan_out);
      model.running_mean[l] = VectorXd::Zero(fan_out);
      model.running_var[l] = VectorXd::Ones(fan_out);
    }
  }
  return model;
}

Eigen::MatrixXd Forward(MlpModel& model, const Eigen::MatrixXd& batch,
                        ForwardMode mode) {
  CheckBatch(model, batch);
  if (mode == ForwardMode::kEval) return Reconstruct(model, batch);
  if (batch.rows() < 2) {
    throw InvalidArgumentError(
        "train-mode forward needs at least two rows for batch statistics");
  }
  ForwardCache cache = ForwardWithCache(model.params, batch);
  UpdateRunningStats(model, cache, batch.rows());
  return std::move(cache.output);
}

Eigen::MatrixXd Reconstruct(const MlpModel& model,
                            const Eigen::MatrixXd& batch) {
  CheckBatch(model, batch);
  return EvalForward(model, batch);
}

double LossAndGradient(const MlpModel& model, const Eigen::MatrixXd& batch,
                       MlpParameters* gradient) {
  CheckBatch(model, batch);
  if (batch.rows() < 2) {
    throw InvalidArgumentError("gradient needs at least two rows");
  }
  *gradient = model.params.ZerosLike();
  const ForwardCache cache = ForwardWithCache(model.params, batch);
  return Backward(model.params, batch, cache, gradient);
}

double ReconstructionLoss(const MlpModel& model, const Eigen::MatrixXd& data) {
  CheckBatch(model, data);
  if (data.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index start = 0; start < data.rows(); start += kEvalChunk) {
    const Eigen::Index count = std::min(kEvalChunk, data.rows() - start);
    const MatrixXd chunk = data.middleRows(start, count);
    total += (EvalForward(model, chunk) - chunk).squaredNorm();
  }
  return total / static_cast<double>(data.size());
}

TrainResult Train(const MlpModel& model, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config) {
  if (config.batch_size < 1 || config.epochs < 1) {
    throw InvalidArgumentError("batch size and epochs must be positive");
  }
  if (!train_set.normalized || !test_set.normalized) {
    throw InvalidArgumentError("training data must be normalized");
  }
  if (train_set.cols() != model.input_size() ||
      test_set.cols() != model.input_size()) {
    throw InvalidArgumentError("dataset width does not match the model");
  }
  if (train_set.rows() < 2) {
    throw InvalidArgumentError("training set needs at least two rows");
  }

  TrainResult result{model, {}};
  MlpModel current = model;
  Adam optimizer(current.params, config);
  MlpParameters grad = current.params.ZerosLike();
  std::mt19937_64 rng(config.seed);
  std::vector<int> order(train_set.rows());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index width = train_set.values.cols();
  MatrixXd batch;

  double best = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Eigen::Index seen = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t count =
          std::min(order.size() - start, static_cast<size_t>(config.batch_size));
      if (count < 2) break;
      batch.resize(static_cast<Eigen::Index>(count), width);
      for (size_t i = 0; i < count; ++i) {
        batch.row(static_cast<Eigen::Index>(i)) =
            train_set.values.row(order[start + i]);
      }
      const ForwardCache cache = ForwardWithCache(current.params, batch);
      const double loss = Backward(current.params, batch, cache, &grad);
      if (!std::isfinite(loss)) {
        throw TrainingDivergedError(
            "training diverged at epoch " + std::to_string(epoch), epoch);
      }
      UpdateRunningStats(current, cache, batch.rows());
      optimizer.Step(current.params, grad);
      loss_sum += loss * static_cast<double>(count);
      seen += static_cast<Eigen::Index>(count);
    }
    const double train_loss = loss_sum / static_cast<double>(seen);
    const double test_loss = ReconstructionLoss(current, test_set.values);
    if (!std::isfinite(test_loss)) {
      throw TrainingDivergedError(
          "training diverged at epoch " + std::to_string(epoch), epoch);
    }
    result.report.train_loss.push_back(train_loss);
    result.report.test_loss.push_back(test_loss);
    if (test_loss < best) {
      best = test_loss;
      result.report.best_epoch = epoch;
      result.model = current;
    }
  }
  return result;
}

Eigen::MatrixXd ExtractFunctionalMatrix(const MlpModel& model,
                                        bool fold_batchnorm) {
  const MatrixXd& to_hidden = model.params.weights[2];  // hidden x latent
  const MatrixXd& to_output = model.params.weights[3];  // inputs x hidden
  if (!fold_batchnorm) return (to_output * to_hidden).transpose();
  const VectorXd scale =
      model.params.gammas[2].array() /
      (model.running_var[2].array() + kBatchNormEpsilon).sqrt();
  return (to_output * scale.asDiagonal() * to_hidden).transpose();
}

nlohmann::json ModelToJson(const MlpModel& model) {
  nlohmann::json json;
  json["layer_sizes"] = model.layer_sizes;
  json["activation"] = "tanh";
  json["batchnorm_epsilon"] = kBatchNormEpsilon;
  auto& layers = json["layers"] = nlohmann::json::array();
  for (int l = 0; l < 4; ++l) {
    nlohmann::json layer;
    layer["weight"] = FlattenRowMajor(model.params.weights[l]);
    layer["bias"] = ToStd(model.params.biases[l]);
    if (l < 3) {
      layer["gamma"] = ToStd(model.params.gammas[l]);
      layer["beta"] = ToStd(model.params.betas[l]);
      layer["running_mean"] = ToStd(model.running_mean[l]);
      layer["running_var"] = ToStd(model.running_var[l]);
    }
    layers.push_back(std::move(layer));
  }
  return json;
}

MlpModel ModelFromJson(const nlohmann::json& json) {
  MlpModel model;
  try {
    const auto sizes = json.at("layer_sizes").get<std::vector<int>>();
    if (sizes.size() != 5 || sizes[0] != sizes[4] || sizes[1] != sizes[3]) {
      throw ParseError("model must have layer sizes (M, H, Nz, H, M)", 0, 0);
    }
    std::copy(sizes.begin(), sizes.end(), model.layer_sizes.begin());
    const auto& layers = json.at("layers");
    if (layers.size() != 4) throw ParseError("model needs 4 layers", 0, 0);
    for (int l = 0; l < 4; ++l) {
      const auto& layer = layers.at(l);
      const int in = sizes[l];
      const int out = sizes[l + 1];
      model.params.weights[l] = UnflattenRowMajor(layer.at("weight"), out, in);
      model.params.biases[l] = VectorFromJson(layer.at("bias"), out);
      if (l < 3) {
        model.params.gammas[l] = VectorFromJson(layer.at("gamma"), out);
        model.params.betas[l] = VectorFromJson(layer.at("beta"), out);
        model.running_mean[l] = VectorFromJson(layer.at("running_mean"), out);
        model.running_var[l] = VectorFromJson(layer.at("running_var"), out);
        if ((model.running_var[l].array() <= 0.0).any()) {
          throw ParseError("running variance must be positive", 0, 0);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what(), 0,
                     0);
  }
  return model;
}

void ExportTrainReportCsv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "epoch,train_loss,test_loss\n";
  char line[128];
  for (size_t i = 0; i < report.train_loss.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", i + 1,
                  report.train_loss[i], report.test_loss[i]);
    out << line;
  }
}

nlohmann::json TrainConfigToJson(const TrainConfig& config) {
  return {{"batch_size", config.batch_size},
          {"epochs", config.epochs},
          {"learning_rate", config.learning_rate},
          {"beta1", config.beta1},
          {"beta2", config.beta2},
          {"epsilon", config.epsilon},
          {"seed", config.seed}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& json,
                                TrainConfig defaults) {
  TrainConfig config = defaults;
  config.batch_size = json.value("batch_size", config.batch_size);
  config.epochs = json.value("epochs", config.epochs);
  config.learning_rate = json.value("learning_rate", config.learning_rate);
  config.beta1 = json.value("beta1", config.beta1);
  config.beta2 = json.value("beta2", config.beta2);
  config.epsilon = json.value("epsilon", config.epsilon);
  config.seed = json.value("seed", config.seed);
  return config;
}

}  // namespace redungroup
