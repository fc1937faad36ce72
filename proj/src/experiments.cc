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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
// exception thrown by any task is rethrown on the caller.
void ParallelFor(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

std::vector<int> Apportion(int total, const std::vector<int>& sizes) {
  const double sum = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  std::vector<int> widths(sizes.size());
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (size_t g = 0; g < sizes.size(); ++g) {
    const double quota = total * sizes[g] / sum;
    widths[g] = static_cast<int>(std::floor(quota));
    assigned += widths[g];
    remainders.emplace_back(quota - widths[g], static_cast<int>(g));
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; assigned < total; ++i, ++assigned) {
    ++widths[remainders[i % remainders.size()].second];
  }
  for (int& w : widths) w = std::max(w, 1);
  return widths;
}

std::string Fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

std::string Precise(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

std::vector<ModeTrials> RunTrials(const ExperimentInputs& inputs,
                                  const TrialsConfig& config) {
  if (config.trials < 1) throw InvalidArgumentError("trials must be >= 1");
  if (config.modes.empty()) throw InvalidArgumentError("no grouping modes");
  const int num_modes = static_cast<int>(config.modes.size());
  // results[trial][mode]
  std::vector<std::vector<GroupingResult>> results(
      config.trials, std::vector<GroupingResult>(num_modes));
  std::vector<std::vector<std::array<double, 3>>> scores(
      config.trials, std::vector<std::array<double, 3>>(num_modes));

  ParallelFor(config.trials, config.jobs, [&](int t) {
    GraphBuildConfig graph_config = config.graph;
    graph_config.seed = config.seed + static_cast<uint64_t>(t);
    const RelationalGraph graph =
        BuildRelationalGraph(inputs.functional, inputs.distances, graph_config);
    const GroupingProblem problem(graph);
    for (int m = 0; m < num_modes; ++m) {
      GroupingConfig grouping = config.grouping;
      grouping.mode = config.modes[m];
      grouping.seed = config.seed + static_cast<uint64_t>(t);
      results[t][m] = Run(problem, grouping);
      std::vector<std::vector<int>> muscles;
      for (const auto& group : results[t][m].XGroups()) {
        std::vector<int> ids;
        for (int v : group) ids.push_back(graph.x_ids[v]);
        muscles.push_back(std::move(ids));
      }
      const ConsistencyReport report = Consistency(muscles, inputs.truth);
      scores[t][m] = {report.a0, report.a1, report.a2};
    }
  });

  std::vector<ModeTrials> out(num_modes);
  for (int m = 0; m < num_modes; ++m) {
    out[m].mode = config.modes[m];
    std::vector<std::array<double, 3>> per_trial;
    for (int t = 0; t < config.trials; ++t) {
      per_trial.push_back(scores[t][m]);
      out[m].results.push_back(std::move(results[t][m]));
    }
    out[m].stats = TrialStats::FromTrials(std::move(per_trial));
  }
  return out;
}

std::vector<SweepRow> SweepLatentSize(const Dataset& train_set,
                                      const Dataset& test_set,
                                      const Eigen::MatrixXd& distances,
                                      const GroundTruth& truth,
                                      std::span<const int> latent_sizes,
                                      const AutoencoderSetup& setup,
                                      const TrialsConfig& trials) {
  const int channels = train_set.cols();
  for (int latent : latent_sizes) {
    if (latent < 1 || latent >= channels) {
      throw InvalidArgumentError("latent size " + std::to_string(latent) +
                                 " must lie in [1, " +
                                 std::to_string(channels) + ")");
    }
  }
  TrialsConfig config = trials;
  config.modes = {trials.modes.empty() ? trials.grouping.mode
                                       : trials.modes.front()};
  std::vector<SweepRow> rows;
  for (int latent : latent_sizes) {
    const MlpModel initial =
        InitModel(channels, latent, setup.hidden, setup.init_seed);
    const TrainResult trained = Train(initial, train_set, test_set, setup.train);
    ExperimentInputs inputs{ExtractFunctionalMatrix(trained.model,
                                                    config.graph.fold_batchnorm),
                            distances, truth};
    SweepRow row;
    row.latent = latent;
    row.best_test_loss = trained.report.best_test_loss();
    row.stats = RunTrials(inputs, config).front().stats;
    rows.push_back(std::move(row));
  }
  return rows;
}

double RetrainReport::budget_error() const {
  if (full_parameters == 0) return 0.0;
  return std::abs(static_cast<double>(grouped_parameters) -
                  static_cast<double>(full_parameters)) /
         static_cast<double>(full_parameters);
}

std::vector<GroupPlan> PlanGroupedAutoencoders(
    const std::vector<std::vector<int>>& channel_groups,
    const std::vector<int>& latent_counts, size_t full_parameters) {
  if (channel_groups.size() != latent_counts.size() || channel_groups.empty()) {
    throw InvalidArgumentError("need one latent count per channel group");
  }
  const int groups = static_cast<int>(channel_groups.size());
  std::vector<int> sizes;
  double fixed = 0.0;
  double per_width = 0.0;  // parameters per unit of total hidden width
  int total_channels = 0;
  for (int g = 0; g < groups; ++g) {
    const int m = static_cast<int>(channel_groups[g].size());
    const int z = latent_counts[g];
    if (m < 2) {
      throw InvalidArgumentError("group " + std::to_string(g) +
                                 " has fewer than two channels");
    }
    if (z < 1) {
      throw InvalidArgumentError("group " + std::to_string(g) +
                                 " has no latent units");
    }
    sizes.push_back(m);
    total_channels += m;
    fixed += 3.0 * z + m;
  }
  for (int g = 0; g < groups; ++g) {
    per_width += static_cast<double>(sizes[g]) / total_channels *
                 (2.0 * sizes[g] + 2.0 * latent_counts[g] + 6.0);
  }
  const double estimate =
      std::max(static_cast<double>(groups),
               (static_cast<double>(full_parameters) - fixed) / per_width);

  std::vector<GroupPlan> best;
  double best_error = std::numeric_limits<double>::infinity();
  const int lo = std::max(groups, static_cast<int>(estimate) - groups - 8);
  const int hi = static_cast<int>(std::ceil(estimate)) + groups + 8;
  for (int total = lo; total <= hi; ++total) {
    const std::vector<int> widths = Apportion(total, sizes);
    std::vector<GroupPlan> plans;
    size_t params = 0;
    for (int g = 0; g < groups; ++g) {
      GroupPlan plan;
      plan.channels = channel_groups[g];
      plan.latent = latent_counts[g];
      plan.hidden = widths[g];
      plan.parameters =
          AutoencoderParameterCount(sizes[g], widths[g], latent_counts[g]);
      params += plan.parameters;
      plans.push_back(std::move(plan));
    }
    const double error = std::abs(static_cast<double>(params) -
                                  static_cast<double>(full_parameters));
    if (error < best_error) {
      best_error = error;
      best = std::move(plans);
    }
  }
  return best;
}

void SplitFromResult(const GroupingResult& result,
                     std::vector<std::vector<int>>* channel_groups,
                     std::vector<int>* latent_counts) {
  channel_groups->clear();
  latent_counts->clear();
  for (const auto& members : result.members) {
    std::vector<int> channels;
    int latent = 0;
    for (int v : members) {
      if (v < result.num_x) {
        channels.push_back(v);
      } else {
        ++latent;
      }
    }
    channel_groups->push_back(std::move(channels));
    latent_counts->push_back(latent);
  }
}

RetrainReport GroupedRetrain(const Dataset& dataset,
                             const std::vector<std::vector<int>>& channel_groups,
                             const std::vector<int>& latent_counts,
                             const RetrainConfig& config) {
  std::set<int> covered;
  for (const auto& group : channel_groups) {
    for (int c : group) {
      if (c < 0 || c >= dataset.cols() || !covered.insert(c).second) {
        throw InvalidArgumentError(
            "channel groups must partition the dataset columns");
      }
    }
  }
  if (static_cast<int>(covered.size()) != dataset.cols()) {
    throw InvalidArgumentError("channel groups must cover every column");
  }
  if (config.low_data_count > dataset.rows() || config.low_data_count < 4) {
    throw InvalidArgumentError("low data count must lie in [4, rows]");
  }
  const int total_latent =
      std::accumulate(latent_counts.begin(), latent_counts.end(), 0);

  RetrainReport report;
  report.full_parameters = AutoencoderParameterCount(
      dataset.cols(), config.hidden, total_latent);
  report.plans = PlanGroupedAutoencoders(channel_groups, latent_counts,
                                         report.full_parameters);
  for (const auto& plan : report.plans) {
    report.grouped_parameters += plan.parameters;
  }
  if (report.budget_error() > config.budget_tolerance) {
    throw InvalidArgumentError("cannot match the parameter budget within " +
                               Fixed(100.0 * config.budget_tolerance, 1) + "%");
  }

  std::vector<int> rows(dataset.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(config.low_data_count);
  std::sort(rows.begin(), rows.end());
  Dataset subset = SelectRows(dataset, rows);
  if (!subset.normalized) subset = Normalize(subset).first;
  const auto [train_set, test_set] =
      SplitTrainTest(subset, config.train_fraction, config.seed + 1);

  TrainConfig train = config.train;
  train.seed = config.seed + 2;
  const TrainResult full = Train(
      InitModel(dataset.cols(), total_latent, config.hidden, config.seed + 3),
      train_set, test_set, train);
  report.full = full.report;
  report.full_best_train = full.report.best_train_loss();
  report.full_best_test = full.report.best_test_loss();

  const size_t epochs = full.report.train_loss.size();
  report.grouped_train_loss.assign(epochs, 0.0);
  report.grouped_test_loss.assign(epochs, 0.0);
  const double channels = static_cast<double>(dataset.cols());
  for (size_t g = 0; g < report.plans.size(); ++g) {
    const GroupPlan& plan = report.plans[g];
    const int width = static_cast<int>(plan.channels.size());
    const double weight = width / channels;
    TrainConfig group_train = config.train;
    group_train.seed = config.seed + 100 + 2 * g;
    const TrainResult trained = Train(
        InitModel(width, plan.latent, plan.hidden, config.seed + 101 + 2 * g),
        SelectColumns(train_set, plan.channels),
        SelectColumns(test_set, plan.channels), group_train);
    for (size_t e = 0; e < epochs; ++e) {
      report.grouped_train_loss[e] += weight * trained.report.train_loss[e];
      report.grouped_test_loss[e] += weight * trained.report.test_loss[e];
    }
    report.grouped_best_train += weight * trained.report.best_train_loss();
    report.grouped_best_test += weight * trained.report.best_test_loss();
    report.groups.push_back(trained.report);
  }
  return report;
}

nlohmann::json ModeTrialsToJson(const std::vector<ModeTrials>& trials) {
  nlohmann::json json = nlohmann::json::array();
  for (const auto& mode : trials) {
    nlohmann::json entry = TrialStatsToJson(mode.stats);
    entry["mode"] = std::string(EvalModeName(mode.mode));
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& result : mode.results) labels.push_back(result.labels);
    entry["labels"] = std::move(labels);
    json.push_back(std::move(entry));
  }
  return json;
}

std::string TrialsTable(const std::vector<ModeTrials>& trials) {
  std::ostringstream out;
  out << "mode  trials  A0 mean (var)      A1 mean (var)      A2 mean (var)\n";
  for (const auto& mode : trials) {
    std::string name(EvalModeName(mode.mode));
    name.resize(6, ' ');
    out << name << std::to_string(mode.stats.count());
    out << std::string(8 - std::to_string(mode.stats.count()).size(), ' ');
    for (int k = 0; k < 3; ++k) {
      std::string cell = Fixed(mode.stats.mean[k], 1) + " (" +
                         Fixed(mode.stats.variance[k], 1) + ")";
      cell.resize(19, ' ');
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

void ExportTrialsCsv(const std::vector<ModeTrials>& trials,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "mode,trial,A0,A1,A2\n";
  for (const auto& mode : trials) {
    for (size_t t = 0; t < mode.stats.trials.size(); ++t) {
      const auto& a = mode.stats.trials[t];
      out << EvalModeName(mode.mode) << ',' << t << ',' << Precise(a[0]) << ','
          << Precise(a[1]) << ',' << Precise(a[2]) << '\n';
    }
  }
  for (const auto& mode : trials) {
    out << EvalModeName(mode.mode) << ",mean," << Precise(mode.stats.mean[0])
        << ',' << Precise(mode.stats.mean[1]) << ','
        << Precise(mode.stats.mean[2]) << '\n';
    out << EvalModeName(mode.mode) << ",variance,"
        << Precise(mode.stats.variance[0]) << ','
        << Precise(mode.stats.variance[1]) << ','
        << Precise(mode.stats.variance[2]) << '\n';
  }
}

void ExportSweepCsv(const std::vector<SweepRow>& rows,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "latent,best_test_loss,trials,A0_mean,A0_var,A1_mean,A1_var,A2_mean,"
         "A2_var\n";
  for (const auto& row : rows) {
    out << row.latent << ',' << Precise(row.best_test_loss) << ','
        << row.stats.count();
    for (int k = 0; k < 3; ++k) {
      out << ',' << Precise(row.stats.mean[k]) << ','
          << Precise(row.stats.variance[k]);
    }
    out << '\n';
  }
}

void ExportRetrainCsv(const RetrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "epoch,full_train_loss,full_test_loss,grouped_train_loss,"
         "grouped_test_loss\n";
  for (size_t e = 0; e < report.full.train_loss.size(); ++e) {
    out << e + 1 << ',' << Precise(report.full.train_loss[e]) << ','
        << Precise(report.full.test_loss[e]) << ','
        << Precise(report.grouped_train_loss[e]) << ','
        << Precise(report.grouped_test_loss[e]) << '\n';
  }
}

nlohmann::json RetrainToJson(const RetrainReport& report) {
  nlohmann::json json;
  json["full_parameters"] = report.full_parameters;
  json["grouped_parameters"] = report.grouped_parameters;
  json["budget_error"] = report.budget_error();
  json["full"] = {{"best_epoch", report.full.best_epoch},
                  {"best_train_loss", report.full_best_train},
                  {"best_test_loss", report.full_best_test},
                  {"gap", report.full_gap()}};
  json["grouped"] = {{"best_train_loss", report.grouped_best_train},
                     {"best_test_loss", report.grouped_best_test},
                     {"gap", report.grouped_gap()}};
  auto& plans = json["groups"] = nlohmann::json::array();
  for (size_t g = 0; g < report.plans.size(); ++g) {
    plans.push_back({{"channels", report.plans[g].channels},
                     {"latent", report.plans[g].latent},
                     {"hidden", report.plans[g].hidden},
                     {"parameters", report.plans[g].parameters},
                     {"best_epoch", report.groups[g].best_epoch}});
  }
  return json;
}

}  // namespace redungroup
