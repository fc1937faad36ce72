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

#include "redungroup/cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "redungroup/autoencoder.h"
#include "redungroup/dataset.h"
#include "redungroup/errors.h"
#include "redungroup/evaluation.h"
#include "redungroup/experiments.h"
#include "redungroup/grouping.h"
#include "redungroup/pipeline.h"
#include "redungroup/relational_graph.h"
#include "redungroup/robot.h"

namespace redungroup {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr const char* kSeedEnv = "REDUNGROUP_SEED";

void RequireFile(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Error("input file not found: " + path);
}

Json ReadJson(const std::string& path) {
  RequireFile(path);
  std::ifstream in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0, 0);
  }
}

void WriteText(const std::string& path, const std::string& text) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << text;
  if (!out) throw Error("failed writing file: " + path);
}

void WriteJson(const std::string& path, const Json& json) {
  WriteText(path, json.dump(2) + "\n");
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::optional<uint64_t> EnvSeed() {
  const char* value = std::getenv(kSeedEnv);
  if (value == nullptr || *value == '\0') return std::nullopt;
  try {
    size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != std::string(value).size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw InvalidArgumentError(std::string(kSeedEnv) + " is not an integer: " +
                               value);
  }
}

// Flag beats environment beats config/default.
uint64_t ResolveSeed(const CLI::Option* flag, uint64_t flag_value,
                     uint64_t fallback) {
  if (flag->count() > 0) return flag_value;
  if (auto env = EnvSeed()) return *env;
  return fallback;
}

PathCenter ParseCenter(const std::string& name) {
  if (name == "midpoint") return PathCenter::kArcLengthMidpoint;
  if (name == "centroid") return PathCenter::kViaPointCentroid;
  throw InvalidArgumentError("center must be 'midpoint' or 'centroid'");
}

std::vector<EvalMode> ParseModes(const std::vector<std::string>& names) {
  std::vector<EvalMode> modes;
  for (const auto& name : names) modes.push_back(ParseEvalMode(name));
  return modes;
}

// Records what a subcommand did so it can be replayed.
class Manifest {
 public:
  Manifest(std::string subcommand, int argc, const char* const* argv)
      : subcommand_(std::move(subcommand)),
        start_(std::chrono::steady_clock::now()) {
    for (int i = 0; i < argc; ++i) argv_.emplace_back(argv[i]);
  }

  void SetConfig(Json config) { config_ = std::move(config); }
  void AddSeed(const std::string& name, uint64_t seed) { seeds_[name] = seed; }
  void AddOutput(const std::string& path) { outputs_.push_back(path); }

  template <typename Fn>
  auto Time(const std::string& stage, Fn&& fn) {
    const auto begin = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings_[stage] = Seconds(begin);
    } else {
      auto value = fn();
      timings_[stage] = Seconds(begin);
      return value;
    }
  }

  // Writes `<dir of first output>/<subcommand>.manifest.json`.
  void Write(const std::string& directory = "") {
    fs::path dir = directory;
    if (dir.empty() && !outputs_.empty()) {
      dir = fs::path(outputs_.front()).parent_path();
    }
    const std::string path = (dir / (subcommand_ + ".manifest.json")).string();
    Json json;
    json["tool"] = "redungroup";
    json["version"] = kToolVersion;
    json["subcommand"] = subcommand_;
    json["argv"] = argv_;
    json["config"] = config_;
    json["seeds"] = seeds_;
    json["outputs"] = outputs_;
    timings_["total"] = Seconds(start_);
    json["timings_seconds"] = timings_;
    WriteJson(path, json);
  }

 private:
  static double Seconds(std::chrono::steady_clock::time_point begin) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         begin)
        .count();
  }

  std::string subcommand_;
  std::vector<std::string> argv_;
  std::chrono::steady_clock::time_point start_;
  Json config_ = Json::object();
  std::map<std::string, uint64_t> seeds_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timings_;
};

Json EvalReportJson(const ConsistencyReport& report) {
  return ConsistencyToJson(report);
}

std::vector<std::vector<int>> MuscleGroups(const GroupingResult& result) {
  return result.XGroups();
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Automatic grouping of redundant sensors and actuators from "
               "functional and spatial connections",
               "redungroup"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.failure_message(CLI::FailureMessage::help);

  std::function<void()> action;
  const std::string manifest_argv_name = argc > 0 ? argv[0] : "redungroup";

  // synth
  struct {
    std::string spec, out = "robot.json", distances, center = "midpoint";
    int chains = 4, joints = 3, pairs = 1, poly = 4;
    double link_length = 0.3;
    uint64_t seed = 0;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic robot");
  synth_cmd->add_option("--spec", synth.spec, "SynthSpec JSON file");
  auto* synth_chains = synth_cmd->add_option("--chains", synth.chains, "Limb count");
  auto* synth_joints =
      synth_cmd->add_option("--joints", synth.joints, "Joints per limb");
  auto* synth_pairs =
      synth_cmd->add_option("--pairs", synth.pairs, "Antagonist pairs per joint");
  auto* synth_poly =
      synth_cmd->add_option("--poly", synth.poly, "Polyarticular muscle count");
  auto* synth_length = synth_cmd->add_option("--link-length", synth.link_length,
                                             "Link length in meters");
  auto* synth_seed = synth_cmd->add_option("--seed", synth.seed, "Geometry seed");
  synth_cmd->add_option("--out", synth.out, "Robot JSON output")
      ->capture_default_str();
  synth_cmd->add_option("--distances", synth.distances,
                        "Also write spread-pose distance matrix CSV");
  synth_cmd->add_option("--center", synth.center, "midpoint or centroid")
      ->capture_default_str();
  synth_cmd->callback([&] {
    action = [&] {
      Manifest manifest("synth", argc, argv);
      SynthSpec spec;
      if (!synth.spec.empty()) spec = SynthSpecFromJson(ReadJson(synth.spec));
      if (synth_chains->count()) spec.chains = synth.chains;
      if (synth_joints->count()) spec.joints_per_chain = synth.joints;
      if (synth_pairs->count()) spec.antagonist_pairs_per_joint = synth.pairs;
      if (synth_poly->count()) spec.polyarticular_count = synth.poly;
      if (synth_length->count()) spec.link_length = synth.link_length;
      spec.seed = ResolveSeed(synth_seed, synth.seed, spec.seed);
      const RobotModel robot = BuildSyntheticRobot(spec);
      WriteJson(synth.out, RobotToJson(robot));
      manifest.AddOutput(synth.out);
      if (!synth.distances.empty()) {
        EnsureParent(synth.distances);
        ExportMatrixCsv(SpatialDistanceMatrix(robot, SpreadPose(robot),
                                              ParseCenter(synth.center)),
                        synth.distances);
        manifest.AddOutput(synth.distances);
      }
      Json config = SynthSpecToJson(spec);
      config["center"] = synth.center;
      manifest.SetConfig(config);
      manifest.AddSeed("robot", spec.seed);
      manifest.Write();
      out << "robot: " << robot.num_muscles() << " muscles, "
          << robot.num_joints() << " joints, " << robot.truth_groups.size()
          << " truth groups -> " << synth.out << "\n";
    };
  });

  // sample
  struct {
    std::string robot, out = "lengths.csv";
    int count = 0;
    uint64_t seed = 0;
  } sample;
  auto* sample_cmd =
      app.add_subcommand("sample", "Sample muscle lengths at random postures");
  sample_cmd->add_option("--robot", sample.robot, "Robot JSON")->required();
  sample_cmd->add_option("-n,--count", sample.count, "Number of postures")
      ->required();
  auto* sample_seed = sample_cmd->add_option("--seed", sample.seed, "Sampling seed");
  sample_cmd->add_option("--out", sample.out, "Lengths CSV output")
      ->capture_default_str();
  sample_cmd->callback([&] {
    action = [&] {
      Manifest manifest("sample", argc, argv);
      const RobotModel robot = RobotFromJson(ReadJson(sample.robot));
      const uint64_t seed = ResolveSeed(sample_seed, sample.seed, 0);
      const Dataset data = manifest.Time(
          "sample", [&] { return SampleRandomPostures(robot, sample.count, seed); });
      EnsureParent(sample.out);
      ExportLengthsCsv(data, sample.out);
      manifest.SetConfig({{"robot", sample.robot}, {"count", sample.count}});
      manifest.AddSeed("sample", seed);
      manifest.AddOutput(sample.out);
      manifest.Write();
      out << "sampled " << data.rows() << " x " << data.cols() << " -> "
          << sample.out << "\n";
    };
  });

  // normalize
  struct {
    std::string in, out = "normalized.csv", stats = "stats.json";
  } norm;
  auto* norm_cmd = app.add_subcommand("normalize", "Z-score a lengths CSV");
  norm_cmd->add_option("--in", norm.in, "Raw lengths CSV")->required();
  norm_cmd->add_option("--out", norm.out, "Normalized CSV output")
      ->capture_default_str();
  norm_cmd->add_option("--stats", norm.stats, "Normalization stats JSON output")
      ->capture_default_str();
  norm_cmd->callback([&] {
    action = [&] {
      Manifest manifest("normalize", argc, argv);
      RequireFile(norm.in);
      const auto [data, stats] = Normalize(ImportLengthsCsv(norm.in));
      EnsureParent(norm.out);
      ExportLengthsCsv(data, norm.out);
      WriteJson(norm.stats, StatsToJson(stats));
      int constant = 0;
      for (bool c : stats.constant) constant += c ? 1 : 0;
      manifest.SetConfig({{"in", norm.in}});
      manifest.AddOutput(norm.out);
      manifest.AddOutput(norm.stats);
      manifest.Write();
      out << "normalized " << data.rows() << " x " << data.cols() << " ("
          << constant << " constant channels) -> " << norm.out << "\n";
    };
  });

  // train-ae
  struct {
    std::string data, stats, out = "model.json", report = "train_report.csv";
    int latent = 12, hidden = 300, batch = 100, epochs = 300;
    double lr = 1e-3, fraction = 0.8;
    uint64_t seed = 0;
  } train;
  auto* train_cmd = app.add_subcommand("train-ae", "Train the autoencoder");
  train_cmd->add_option("--data", train.data, "Lengths CSV")->required();
  train_cmd->add_option("--stats", train.stats,
                        "Stats JSON; marks --data as already normalized");
  train_cmd->add_option("--nz", train.latent, "Latent size")->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden, "Hidden width")
      ->capture_default_str();
  train_cmd->add_option("--batch", train.batch, "Batch size")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Adam step size")->capture_default_str();
  train_cmd->add_option("--train-fraction", train.fraction, "Train share")
      ->capture_default_str();
  auto* train_seed = train_cmd->add_option(
      "--seed", train.seed, "Base seed (split +2, init +3, shuffle +4)");
  train_cmd->add_option("--out", train.out, "Model JSON output")
      ->capture_default_str();
  train_cmd->add_option("--report", train.report, "Loss CSV output")
      ->capture_default_str();
  train_cmd->callback([&] {
    action = [&] {
      Manifest manifest("train-ae", argc, argv);
      RequireFile(train.data);
      Dataset data = ImportLengthsCsv(train.data);
      if (!train.stats.empty()) {
        data.normalized = true;
        data.stats = StatsFromJson(ReadJson(train.stats));
      } else {
        data = Normalize(data).first;
      }
      const uint64_t seed = ResolveSeed(train_seed, train.seed, 0);
      const auto [train_set, test_set] = SplitTrainTest(
          data, train.fraction, StageSeed(seed, kSeedSplit));
      TrainConfig config;
      config.batch_size = train.batch;
      config.epochs = train.epochs;
      config.learning_rate = train.lr;
      config.seed = StageSeed(seed, kSeedTrain);
      const TrainResult result = manifest.Time("train", [&] {
        return Train(InitModel(data.cols(), train.latent, train.hidden,
                               StageSeed(seed, kSeedInit)),
                     train_set, test_set, config);
      });
      Json model = ModelToJson(result.model);
      model["training"] = {{"best_epoch", result.report.best_epoch + 1},
                           {"best_test_loss", result.report.best_test_loss()},
                           {"config", TrainConfigToJson(config)}};
      WriteJson(train.out, model);
      EnsureParent(train.report);
      ExportTrainReportCsv(result.report, train.report);
      Json snapshot = TrainConfigToJson(config);
      snapshot["latent"] = train.latent;
      snapshot["hidden"] = train.hidden;
      snapshot["train_fraction"] = train.fraction;
      snapshot["data"] = train.data;
      manifest.SetConfig(snapshot);
      manifest.AddSeed("split", StageSeed(seed, kSeedSplit));
      manifest.AddSeed("init", StageSeed(seed, kSeedInit));
      manifest.AddSeed("train", StageSeed(seed, kSeedTrain));
      manifest.AddOutput(train.out);
      manifest.AddOutput(train.report);
      manifest.Write();
      out << "best test loss " << result.report.best_test_loss() << " at epoch "
          << result.report.best_epoch + 1 << " -> " << train.out << "\n";
    };
  });

  // build-graph
  struct {
    std::string model, robot, distances, out = "graph.json", center = "midpoint";
    double noise = 0.1;
    bool raw = false, fold = false;
    uint64_t seed = 0;
  } graph_opts;
  auto* graph_cmd =
      app.add_subcommand("build-graph", "Assemble the relational graph");
  graph_cmd->add_option("--model", graph_opts.model, "Model JSON")->required();
  graph_cmd->add_option("--robot", graph_opts.robot,
                        "Robot JSON (distances from the spread pose)");
  graph_cmd->add_option("--distances", graph_opts.distances,
                        "Distance matrix CSV (instead of --robot)");
  graph_cmd->add_option("--center", graph_opts.center, "midpoint or centroid")
      ->capture_default_str();
  graph_cmd->add_option("--noise", graph_opts.noise, "Distance noise std (m)")
      ->capture_default_str();
  graph_cmd->add_flag("--raw-functional", graph_opts.raw,
                      "Keep signed decoder weights");
  graph_cmd->add_flag("--fold-batchnorm", graph_opts.fold,
                      "Fold decoder batch-norm scale into W");
  auto* graph_seed = graph_cmd->add_option("--seed", graph_opts.seed, "Noise seed");
  graph_cmd->add_option("--out", graph_opts.out, "Graph JSON output")
      ->capture_default_str();
  graph_cmd->callback([&] {
    action = [&] {
      Manifest manifest("build-graph", argc, argv);
      const MlpModel model = ModelFromJson(ReadJson(graph_opts.model));
      Eigen::MatrixXd distances;
      std::vector<std::string> warnings;
      if (!graph_opts.distances.empty()) {
        RequireFile(graph_opts.distances);
        distances = ImportDistanceMatrix(graph_opts.distances,
                                         model.input_size(), &warnings);
      } else if (!graph_opts.robot.empty()) {
        const RobotModel robot = RobotFromJson(ReadJson(graph_opts.robot));
        distances = SpatialDistanceMatrix(robot, SpreadPose(robot),
                                          ParseCenter(graph_opts.center));
      } else {
        throw CLI::RequiredError("--robot or --distances");
      }
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      GraphBuildConfig config;
      config.noise_std = graph_opts.noise;
      config.abs_functional = !graph_opts.raw;
      config.fold_batchnorm = graph_opts.fold;
      config.seed = ResolveSeed(graph_seed, graph_opts.seed, 0);
      const RelationalGraph graph = BuildRelationalGraph(
          ExtractFunctionalMatrix(model, config.fold_batchnorm), distances,
          config);
      WriteJson(graph_opts.out, GraphToJson(graph));
      manifest.SetConfig({{"model", graph_opts.model},
                          {"robot", graph_opts.robot},
                          {"distances", graph_opts.distances},
                          {"noise_std", config.noise_std},
                          {"abs_functional", config.abs_functional},
                          {"fold_batchnorm", config.fold_batchnorm}});
      manifest.AddSeed("noise", config.seed);
      manifest.AddOutput(graph_opts.out);
      manifest.Write();
      out << "graph: " << graph.num_x << " x-vertices, " << graph.num_z
          << " z-vertices, beta " << graph.beta << " -> " << graph_opts.out
          << "\n";
    };
  });

  // group
  struct {
    std::string graph, out = "result.json", mode = "both";
    int groups = 14, min_x = 2, min_z = 1, iterations = 30000;
    double alpha = 10.0;
    bool count_blocked = false;
    uint64_t seed = 0;
  } group;
  auto* group_cmd = app.add_subcommand("group", "Run the randomized grouping");
  group_cmd->add_option("--graph", group.graph, "Graph JSON")->required();
  group_cmd->add_option("--mode", group.mode, "func, spac or both")
      ->capture_default_str();
  group_cmd->add_option("--ngroups", group.groups, "Group count")
      ->capture_default_str();
  group_cmd->add_option("--min-x", group.min_x, "Minimum x-vertices per group")
      ->capture_default_str();
  group_cmd->add_option("--min-z", group.min_z, "Minimum z-vertices per group")
      ->capture_default_str();
  group_cmd->add_option("--iters", group.iterations, "Effective moves")
      ->capture_default_str();
  group_cmd->add_option("--alpha", group.alpha, "Spatial term weight")
      ->capture_default_str();
  group_cmd->add_flag("--count-blocked", group.count_blocked,
                      "Blocked picks also advance the schedule");
  auto* group_seed = group_cmd->add_option("--seed", group.seed, "Grouping seed");
  group_cmd->add_option("--out", group.out, "Result JSON output")
      ->capture_default_str();
  group_cmd->callback([&] {
    action = [&] {
      Manifest manifest("group", argc, argv);
      const RelationalGraph graph = GraphFromJson(ReadJson(group.graph));
      GroupingConfig config;
      config.num_groups = group.groups;
      config.min_x = group.min_x;
      config.min_z = group.min_z;
      config.num_iterations = group.iterations;
      config.alpha = group.alpha;
      config.mode = ParseEvalMode(group.mode);
      config.count_blocked_iterations = group.count_blocked;
      config.seed = ResolveSeed(group_seed, group.seed, 0);
      const GroupingResult result =
          manifest.Time("group", [&] { return Run(graph, config); });
      Json json = ResultToJson(result);
      json["config"] = GroupingConfigToJson(config);
      WriteJson(group.out, json);
      Json snapshot = GroupingConfigToJson(config);
      snapshot["graph"] = group.graph;
      manifest.SetConfig(snapshot);
      manifest.AddSeed("grouping", config.seed);
      manifest.AddOutput(group.out);
      manifest.Write();
      out << "grouped into " << result.num_groups << " groups, local optimality "
          << result.local_optimality << " -> " << group.out << "\n";
    };
  });

  // eval
  struct {
    std::string result, robot, out = "eval.json", csv;
    bool bijective = false;
  } eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Score a grouping against the ground truth");
  eval_cmd->add_option("--result", eval.result, "Result JSON")->required();
  eval_cmd->add_option("--robot", eval.robot, "Robot JSON with truth groups")
      ->required();
  eval_cmd->add_flag("--bijective", eval.bijective,
                     "One proposed group per truth group");
  eval_cmd->add_option("--out", eval.out, "Report JSON output")
      ->capture_default_str();
  eval_cmd->add_option("--csv", eval.csv, "Also write a CSV report");
  eval_cmd->callback([&] {
    action = [&] {
      Manifest manifest("eval", argc, argv);
      const GroupingResult result = ResultFromJson(ReadJson(eval.result));
      const GroundTruth truth =
          GroundTruth::FromRobot(RobotFromJson(ReadJson(eval.robot)));
      const ConsistencyReport report = Consistency(
          MuscleGroups(result), truth,
          eval.bijective ? MatchingRule::kBijective : MatchingRule::kExistence);
      WriteJson(eval.out, EvalReportJson(report));
      manifest.AddOutput(eval.out);
      if (!eval.csv.empty()) {
        std::ostringstream csv;
        csv << "truth_group,best_match,mismatch\n";
        for (size_t t = 0; t < report.best_match.size(); ++t) {
          csv << t << ',' << report.best_match[t] << ','
              << report.best_mismatch[t] << '\n';
        }
        csv << "A0," << report.a0 << ",\nA1," << report.a1 << ",\nA2,"
            << report.a2 << ",\n";
        WriteText(eval.csv, csv.str());
        manifest.AddOutput(eval.csv);
      }
      manifest.SetConfig({{"result", eval.result},
                          {"robot", eval.robot},
                          {"bijective", eval.bijective}});
      manifest.Write();
      out << "A0 " << report.a0 << "  A1 " << report.a1 << "  A2 " << report.a2
          << "\n";
    };
  });

  // trials
  struct {
    std::string model, robot, distances, out = "trials.csv", json = "trials.json";
    std::string center = "midpoint";
    std::vector<std::string> modes = {"func", "spac", "both"};
    int trials = 10, groups = 0, iterations = 30000, jobs = 1;
    double alpha = 10.0, noise = 0.1;
    uint64_t seed = 0;
  } trials;
  auto* trials_cmd =
      app.add_subcommand("trials", "Repeat grouping over seeds and modes");
  trials_cmd->add_option("--model", trials.model, "Model JSON")->required();
  trials_cmd->add_option("--robot", trials.robot, "Robot JSON (truth groups)")
      ->required();
  trials_cmd->add_option("--distances", trials.distances,
                         "Distance CSV (default: robot spread pose)");
  trials_cmd->add_option("--center", trials.center, "midpoint or centroid")
      ->capture_default_str();
  trials_cmd->add_option("--modes", trials.modes, "Subset of func spac both")
      ->delimiter(',')
      ->capture_default_str();
  trials_cmd->add_option("--trials", trials.trials, "Trials per mode")
      ->capture_default_str();
  trials_cmd->add_option("--ngroups", trials.groups,
                         "Group count (0: one per truth group)")
      ->capture_default_str();
  trials_cmd->add_option("--iters", trials.iterations, "Effective moves")
      ->capture_default_str();
  trials_cmd->add_option("--alpha", trials.alpha, "Spatial term weight")
      ->capture_default_str();
  trials_cmd->add_option("--noise", trials.noise, "Distance noise std (m)")
      ->capture_default_str();
  trials_cmd->add_option("--jobs", trials.jobs, "Parallel trials")
      ->capture_default_str();
  auto* trials_seed =
      trials_cmd->add_option("--seed", trials.seed, "Trial t uses seed + t");
  trials_cmd->add_option("--out", trials.out, "CSV output")->capture_default_str();
  trials_cmd->add_option("--json", trials.json, "JSON output")
      ->capture_default_str();
  trials_cmd->callback([&] {
    action = [&] {
      Manifest manifest("trials", argc, argv);
      const MlpModel model = ModelFromJson(ReadJson(trials.model));
      const RobotModel robot = RobotFromJson(ReadJson(trials.robot));
      ExperimentInputs inputs;
      inputs.functional = ExtractFunctionalMatrix(model);
      inputs.truth = GroundTruth::FromRobot(robot);
      if (!trials.distances.empty()) {
        RequireFile(trials.distances);
        std::vector<std::string> warnings;
        inputs.distances = ImportDistanceMatrix(
            trials.distances, model.input_size(), &warnings);
        for (const auto& w : warnings) err << "warning: " << w << "\n";
      } else {
        inputs.distances = SpatialDistanceMatrix(robot, SpreadPose(robot),
                                                 ParseCenter(trials.center));
      }
      TrialsConfig config;
      config.graph.noise_std = trials.noise;
      config.grouping.num_groups =
          trials.groups > 0 ? trials.groups
                            : static_cast<int>(inputs.truth.groups.size());
      config.grouping.num_iterations = trials.iterations;
      config.grouping.alpha = trials.alpha;
      config.modes = ParseModes(trials.modes);
      config.trials = trials.trials;
      config.jobs = trials.jobs;
      config.seed = ResolveSeed(trials_seed, trials.seed, 0);
      const auto results =
          manifest.Time("trials", [&] { return RunTrials(inputs, config); });
      EnsureParent(trials.out);
      ExportTrialsCsv(results, trials.out);
      WriteJson(trials.json, ModeTrialsToJson(results));
      out << TrialsTable(results);
      Json snapshot = GroupingConfigToJson(config.grouping);
      snapshot["noise_std"] = config.graph.noise_std;
      snapshot["trials"] = config.trials;
      snapshot["modes"] = trials.modes;
      manifest.SetConfig(snapshot);
      manifest.AddSeed("trials", config.seed);
      manifest.AddOutput(trials.out);
      manifest.AddOutput(trials.json);
      manifest.Write();
    };
  });

  // sweep-nz
  struct {
    std::string data, robot, out = "sweep.csv", mode = "func";
    std::vector<int> values = {4, 8, 12};
    int trials = 10, groups = 0, hidden = 300, batch = 100, epochs = 300,
        jobs = 1, iterations = 30000;
    double noise = 0.1, fraction = 0.8;
    uint64_t seed = 0;
  } sweep;
  auto* sweep_cmd =
      app.add_subcommand("sweep-nz", "Compare consistency across latent sizes");
  sweep_cmd->add_option("--data", sweep.data, "Raw lengths CSV")->required();
  sweep_cmd->add_option("--robot", sweep.robot, "Robot JSON")->required();
  sweep_cmd->add_option("--values", sweep.values, "Latent sizes")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--mode", sweep.mode, "Grouping mode")
      ->capture_default_str();
  sweep_cmd->add_option("--trials", sweep.trials, "Trials per latent size")
      ->capture_default_str();
  sweep_cmd->add_option("--ngroups", sweep.groups, "Group count (0: truth)")
      ->capture_default_str();
  sweep_cmd->add_option("--iters", sweep.iterations, "Effective moves")
      ->capture_default_str();
  sweep_cmd->add_option("--hidden", sweep.hidden, "Hidden width")
      ->capture_default_str();
  sweep_cmd->add_option("--batch", sweep.batch, "Batch size")->capture_default_str();
  sweep_cmd->add_option("--epochs", sweep.epochs, "Epochs")->capture_default_str();
  sweep_cmd->add_option("--noise", sweep.noise, "Distance noise std (m)")
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel trials")
      ->capture_default_str();
  auto* sweep_seed = sweep_cmd->add_option("--seed", sweep.seed, "Base seed");
  sweep_cmd->add_option("--out", sweep.out, "CSV output")->capture_default_str();
  sweep_cmd->callback([&] {
    action = [&] {
      Manifest manifest("sweep-nz", argc, argv);
      RequireFile(sweep.data);
      const RobotModel robot = RobotFromJson(ReadJson(sweep.robot));
      const Dataset data = Normalize(ImportLengthsCsv(sweep.data)).first;
      const uint64_t seed = ResolveSeed(sweep_seed, sweep.seed, 0);
      const auto [train_set, test_set] =
          SplitTrainTest(data, sweep.fraction, StageSeed(seed, kSeedSplit));
      AutoencoderSetup setup;
      setup.hidden = sweep.hidden;
      setup.train.batch_size = sweep.batch;
      setup.train.epochs = sweep.epochs;
      setup.train.seed = StageSeed(seed, kSeedTrain);
      setup.init_seed = StageSeed(seed, kSeedInit);
      const GroundTruth truth = GroundTruth::FromRobot(robot);
      TrialsConfig config;
      config.graph.noise_std = sweep.noise;
      config.grouping.num_groups =
          sweep.groups > 0 ? sweep.groups : static_cast<int>(truth.groups.size());
      config.grouping.num_iterations = sweep.iterations;
      config.modes = {ParseEvalMode(sweep.mode)};
      config.trials = sweep.trials;
      config.jobs = sweep.jobs;
      config.seed = StageSeed(seed, kSeedTrials);
      const auto rows = manifest.Time("sweep", [&] {
        return SweepLatentSize(train_set, test_set,
                               SpatialDistanceMatrix(robot, SpreadPose(robot)),
                               truth, sweep.values, setup, config);
      });
      EnsureParent(sweep.out);
      ExportSweepCsv(rows, sweep.out);
      out << "latent  A0      A1      A2      best_test_loss\n";
      for (const auto& row : rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-7d %-7.1f %-7.1f %-7.1f %.5f\n",
                      row.latent, row.stats.mean[0], row.stats.mean[1],
                      row.stats.mean[2], row.best_test_loss);
        out << line;
      }
      manifest.SetConfig({{"data", sweep.data},
                          {"values", sweep.values},
                          {"mode", sweep.mode},
                          {"trials", sweep.trials},
                          {"hidden", sweep.hidden},
                          {"batch", sweep.batch},
                          {"epochs", sweep.epochs},
                          {"noise_std", sweep.noise}});
      manifest.AddSeed("base", seed);
      manifest.AddOutput(sweep.out);
      manifest.Write();
    };
  });

  // retrain-split
  struct {
    std::string data, result, out = "retrain.csv", json = "retrain.json";
    int count = 1000, hidden = 300, batch = 100, epochs = 300;
    uint64_t seed = 0;
  } retrain;
  auto* retrain_cmd = app.add_subcommand(
      "retrain-split", "Compare full and grouped autoencoders on little data");
  retrain_cmd->add_option("--data", retrain.data, "Raw lengths CSV")->required();
  retrain_cmd->add_option("--result", retrain.result, "Grouping result JSON")
      ->required();
  retrain_cmd->add_option("--count", retrain.count, "Rows to subsample")
      ->capture_default_str();
  retrain_cmd->add_option("--hidden", retrain.hidden, "Full-model hidden width")
      ->capture_default_str();
  retrain_cmd->add_option("--batch", retrain.batch, "Batch size")
      ->capture_default_str();
  retrain_cmd->add_option("--epochs", retrain.epochs, "Epochs")
      ->capture_default_str();
  auto* retrain_seed = retrain_cmd->add_option("--seed", retrain.seed, "Seed");
  retrain_cmd->add_option("--out", retrain.out, "Loss curves CSV")
      ->capture_default_str();
  retrain_cmd->add_option("--json", retrain.json, "Summary JSON")
      ->capture_default_str();
  retrain_cmd->callback([&] {
    action = [&] {
      Manifest manifest("retrain-split", argc, argv);
      RequireFile(retrain.data);
      const Dataset data = ImportLengthsCsv(retrain.data);
      const GroupingResult result = ResultFromJson(ReadJson(retrain.result));
      std::vector<std::vector<int>> channels;
      std::vector<int> latent;
      SplitFromResult(result, &channels, &latent);
      RetrainConfig config;
      config.low_data_count = retrain.count;
      config.hidden = retrain.hidden;
      config.train.batch_size = retrain.batch;
      config.train.epochs = retrain.epochs;
      config.seed = ResolveSeed(retrain_seed, retrain.seed, 0);
      const RetrainReport report = manifest.Time(
          "retrain", [&] { return GroupedRetrain(data, channels, latent, config); });
      EnsureParent(retrain.out);
      ExportRetrainCsv(report, retrain.out);
      WriteJson(retrain.json, RetrainToJson(report));
      out << "full:    train " << report.full_best_train << "  test "
          << report.full_best_test << "  gap " << report.full_gap() << "\n"
          << "grouped: train " << report.grouped_best_train << "  test "
          << report.grouped_best_test << "  gap " << report.grouped_gap()
          << "\n"
          << "parameters: full " << report.full_parameters << ", grouped "
          << report.grouped_parameters << "\n";
      manifest.SetConfig({{"data", retrain.data},
                          {"result", retrain.result},
                          {"count", retrain.count},
                          {"hidden", retrain.hidden},
                          {"batch", retrain.batch},
                          {"epochs", retrain.epochs}});
      manifest.AddSeed("retrain", config.seed);
      manifest.AddOutput(retrain.out);
      manifest.AddOutput(retrain.json);
      manifest.Write();
    };
  });

  // baseline-mst
  struct {
    std::string graph, out = "baseline.json";
    int groups = 14;
  } baseline;
  auto* baseline_cmd = app.add_subcommand(
      "baseline-mst", "Kruskal-order merging baseline without size limits");
  baseline_cmd->add_option("--graph", baseline.graph, "Graph JSON")->required();
  baseline_cmd->add_option("--ngroups", baseline.groups, "Group count")
      ->capture_default_str();
  baseline_cmd->add_option("--out", baseline.out, "Result JSON output")
      ->capture_default_str();
  baseline_cmd->callback([&] {
    action = [&] {
      Manifest manifest("baseline-mst", argc, argv);
      const RelationalGraph graph = GraphFromJson(ReadJson(baseline.graph));
      const GroupingResult result = BaselineKruskalMerge(graph, baseline.groups);
      WriteJson(baseline.out, ResultToJson(result));
      manifest.SetConfig({{"graph", baseline.graph}, {"ngroups", baseline.groups}});
      manifest.AddOutput(baseline.out);
      manifest.Write();
      out << "largest group holds " << result.MaxGroupFraction() * 100.0
          << "% of x-vertices -> " << baseline.out << "\n";
    };
  });

  // export-dot
  struct {
    std::string graph, result, out = "graph.dot";
  } dot;
  auto* dot_cmd = app.add_subcommand("export-dot", "Render the graph as DOT");
  dot_cmd->add_option("--graph", dot.graph, "Graph JSON")->required();
  dot_cmd->add_option("--result", dot.result, "Result JSON for group colors");
  dot_cmd->add_option("--out", dot.out, "DOT output")->capture_default_str();
  dot_cmd->callback([&] {
    action = [&] {
      Manifest manifest("export-dot", argc, argv);
      const RelationalGraph graph = GraphFromJson(ReadJson(dot.graph));
      std::optional<std::vector<int>> labels;
      if (!dot.result.empty()) {
        labels = ResultFromJson(ReadJson(dot.result)).labels;
      }
      WriteText(dot.out, GraphToDot(graph, labels));
      manifest.SetConfig({{"graph", dot.graph}, {"result", dot.result}});
      manifest.AddOutput(dot.out);
      manifest.Write();
      out << "wrote " << dot.out << "\n";
    };
  });

  // pipeline
  struct {
    std::string config, out_dir = "pipeline_out";
    int trials = 0, jobs = 0, samples = 0, epochs = 0;
    uint64_t seed = 0;
  } pipe;
  auto* pipe_cmd = app.add_subcommand(
      "pipeline", "synth -> sample -> normalize -> train-ae -> build-graph -> "
                  "trials -> eval from one config file");
  pipe_cmd->add_option("--config", pipe.config, "Pipeline config JSON");
  pipe_cmd->add_option("--out-dir", pipe.out_dir, "Output directory")
      ->capture_default_str();
  auto* pipe_seed = pipe_cmd->add_option("--seed", pipe.seed, "Top-level seed");
  auto* pipe_trials = pipe_cmd->add_option("--trials", pipe.trials, "Trials");
  auto* pipe_jobs = pipe_cmd->add_option("--jobs", pipe.jobs, "Parallel trials");
  auto* pipe_samples =
      pipe_cmd->add_option("--samples", pipe.samples, "Sampled postures");
  auto* pipe_epochs = pipe_cmd->add_option("--epochs", pipe.epochs, "Epochs");
  pipe_cmd->callback([&] {
    action = [&] {
      Manifest manifest("pipeline", argc, argv);
      PipelineConfig config;
      if (!pipe.config.empty()) {
        config = PipelineConfigFromJson(ReadJson(pipe.config));
      }
      config.seed = ResolveSeed(pipe_seed, pipe.seed, config.seed);
      if (pipe_trials->count()) config.trials = pipe.trials;
      if (pipe_jobs->count()) config.jobs = pipe.jobs;
      if (pipe_samples->count()) config.samples = pipe.samples;
      if (pipe_epochs->count()) config.train.epochs = pipe.epochs;

      const fs::path dir = pipe.out_dir;
      fs::create_directories(dir);
      auto path = [&dir](const char* name) { return (dir / name).string(); };
      const PipelineOutputs outputs = manifest.Time("pipeline", [&] {
        return RunPipeline(config, [&err](std::string_view message) {
          err << message << "\n";
        });
      });

      const Json resolved = PipelineConfigToJson(config);
      WriteJson(path("config.json"), resolved);
      WriteJson(path("robot.json"), RobotToJson(outputs.robot));
      WriteJson(path("stats.json"), StatsToJson(outputs.stats));
      WriteJson(path("model.json"), ModelToJson(outputs.model));
      ExportTrainReportCsv(outputs.report, path("train_report.csv"));
      ExportMatrixCsv(outputs.distances, path("distances.csv"));
      ExportTrialsCsv(outputs.trials, path("trials.csv"));

      Json results;
      results["config"] = resolved;
      results["muscles"] = outputs.robot.num_muscles();
      results["truth_groups"] = outputs.truth.groups.size();
      results["autoencoder"] = {{"best_epoch", outputs.report.best_epoch + 1},
                                {"best_test_loss", outputs.report.best_test_loss()}};
      results["trials"] = ModeTrialsToJson(outputs.trials);
      WriteJson(path("results.json"), results);

      for (const char* name :
           {"config.json", "robot.json", "stats.json", "model.json",
            "train_report.csv", "distances.csv", "trials.csv", "results.json"}) {
        manifest.AddOutput(path(name));
      }
      manifest.SetConfig(resolved);
      manifest.AddSeed("top", config.seed);
      manifest.AddSeed("robot", StageSeed(config.seed, kSeedRobot));
      manifest.AddSeed("sample", StageSeed(config.seed, kSeedSample));
      manifest.AddSeed("split", StageSeed(config.seed, kSeedSplit));
      manifest.AddSeed("init", StageSeed(config.seed, kSeedInit));
      manifest.AddSeed("train", StageSeed(config.seed, kSeedTrain));
      manifest.AddSeed("trials", StageSeed(config.seed, kSeedTrials));
      manifest.Write(dir.string());
      out << TrialsTable(outputs.trials);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (action) action();
  } catch (const CLI::RequiredError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace redungroup
