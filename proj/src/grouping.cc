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

#include "redungroup/grouping.h"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "redungroup/errors.h"

namespace redungroup {

std::string_view EvalModeName(EvalMode mode) {
  switch (mode) {
    case EvalMode::kFunc:
      return "func";
    case EvalMode::kSpac:
      return "spac";
    case EvalMode::kBoth:
      return "both";
  }
  return "both";
}

EvalMode ParseEvalMode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "func") return EvalMode::kFunc;
  if (lower == "spac") return EvalMode::kSpac;
  if (lower == "both") return EvalMode::kBoth;
  throw InvalidArgumentError("unknown grouping mode '" + std::string(name) +
                             "' (expected func, spac or both)");
}

void GroupingConfig::Validate(int num_x, int num_z) const {
  if (num_groups < 2) throw InvalidArgumentError("need at least two groups");
  if (min_x < 1 || min_z < 0) {
    throw InvalidArgumentError("minimum group sizes must be min_x >= 1, "
                               "min_z >= 0");
  }
  if (num_groups * min_x > num_x) {
    throw InvalidArgumentError(
        "infeasible quota: " + std::to_string(num_groups) + " groups x " +
        std::to_string(min_x) + " x-vertices exceeds " + std::to_string(num_x));
  }
  if (num_groups * min_z > num_z) {
    throw InvalidArgumentError(
        "infeasible quota: " + std::to_string(num_groups) + " groups x " +
        std::to_string(min_z) + " z-vertices exceeds " + std::to_string(num_z));
  }
  // Every group needs x_count >= z_count + 1.
  if (num_x < num_z + num_groups) {
    throw InvalidArgumentError(
        "infeasible quota: cannot keep more x- than z-vertices in all " +
        std::to_string(num_groups) + " groups");
  }
  if (num_iterations < 1) throw InvalidArgumentError("num_iterations < 1");
  if (!(alpha > 0.0)) throw InvalidArgumentError("alpha must be positive");
}

double CalcEval(std::span<const double> functional,
                std::span<const double> spatial, double alpha, EvalMode mode) {
  double functional_term = 0.0;
  if (!functional.empty()) {
    double sum = 0.0;
    for (double w : functional) sum += w;
    functional_term = sum / static_cast<double>(functional.size());
  }
  double spatial_sum = 0.0;
  for (double w : spatial) spatial_sum += w;
  const double spatial_term = alpha * spatial_sum;
  switch (mode) {
    case EvalMode::kFunc:
      return functional_term;
    case EvalMode::kSpac:
      return spatial_term;
    case EvalMode::kBoth:
      return functional_term + spatial_term;
  }
  return functional_term + spatial_term;
}

GroupingProblem::GroupingProblem(const RelationalGraph& graph)
    : num_x_(graph.num_x),
      num_z_(graph.num_z),
      functional_(graph.FunctionalMatrix()),
      spatial_(graph.SpatialMatrix()) {}

std::vector<double> GroupingProblem::Scores(const std::vector<int>& labels,
                                            int num_groups, int vertex,
                                            double alpha, EvalMode mode) const {
  std::vector<std::vector<double>> functional(num_groups);
  std::vector<std::vector<double>> spatial(num_groups);
  if (is_x(vertex)) {
    for (int z = 0; z < num_z_; ++z) {
      functional[labels[num_x_ + z]].push_back(functional_(z, vertex));
    }
    for (int x = 0; x < num_x_; ++x) {
      if (x != vertex) spatial[labels[x]].push_back(spatial_(vertex, x));
    }
  } else {
    const int z = vertex - num_x_;
    for (int x = 0; x < num_x_; ++x) {
      functional[labels[x]].push_back(functional_(z, x));
    }
  }
  std::vector<double> scores(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    scores[g] = CalcEval(functional[g], spatial[g], alpha, mode);
  }
  return scores;
}

int MersenneStepRandom::Vertex(int count) {
  return std::uniform_int_distribution<int>(0, count - 1)(rng_);
}

double MersenneStepRandom::Unit() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
}

int MersenneStepRandom::Group(int count) {
  return std::uniform_int_distribution<int>(0, count - 1)(rng_);
}

GroupingState InitializeGroups(const GroupingProblem& problem,
                               const GroupingConfig& config, uint64_t seed) {
  const int num_x = problem.num_x();
  const int num_z = problem.num_z();
  const int groups = config.num_groups;
  config.Validate(num_x, num_z);

  std::mt19937_64 rng(seed);
  GroupingState state;
  state.labels.assign(problem.num_vertices(), -1);
  state.x_count.assign(groups, 0);
  state.z_count.assign(groups, 0);
  auto assign = [&state, num_x](int vertex, int group) {
    state.labels[vertex] = group;
    if (vertex < num_x) {
      ++state.x_count[group];
    } else {
      ++state.z_count[group];
    }
  };

  std::vector<int> xs(num_x);
  std::iota(xs.begin(), xs.end(), 0);
  std::shuffle(xs.begin(), xs.end(), rng);
  std::vector<int> zs(num_z);
  std::iota(zs.begin(), zs.end(), num_x);
  std::shuffle(zs.begin(), zs.end(), rng);

  size_t next_x = 0;
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < config.min_x; ++i) assign(xs[next_x++], g);
  }
  size_t next_z = 0;
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < config.min_z; ++i) assign(zs[next_z++], g);
  }
  // Top up groups whose quota alone breaks x_count > z_count.
  for (int g = 0; g < groups; ++g) {
    while (state.x_count[g] <= state.z_count[g]) assign(xs[next_x++], g);
  }
  std::uniform_int_distribution<int> any_group(0, groups - 1);
  for (; next_x < xs.size(); ++next_x) assign(xs[next_x], any_group(rng));

  std::vector<int> open;
  for (; next_z < zs.size(); ++next_z) {
    open.clear();
    for (int g = 0; g < groups; ++g) {
      if (state.x_count[g] > state.z_count[g] + 1) open.push_back(g);
    }
    // Validate() guarantees enough slack in total.
    std::uniform_int_distribution<size_t> pick(0, open.size() - 1);
    assign(zs[next_z], open[pick(rng)]);
  }
  return state;
}

bool IsMovable(const GroupingProblem& problem, const GroupingState& state,
               const GroupingConfig& config, int vertex) {
  const int g = state.labels[vertex];
  if (problem.is_x(vertex)) {
    return state.x_count[g] > config.min_x &&
           state.x_count[g] > state.z_count[g] + 1;
  }
  return state.z_count[g] > config.min_z;
}

StepRecord Step(GroupingState& state, const GroupingProblem& problem,
                const GroupingConfig& config, StepRandom& random) {
  StepRecord record;
  record.vertex = random.Vertex(problem.num_vertices());
  record.from = state.labels[record.vertex];
  record.to = record.from;
  if (!IsMovable(problem, state, config, record.vertex)) {
    record.outcome = StepOutcome::kBlocked;
    if (config.count_blocked_iterations) ++state.iteration;
    return record;
  }

  const std::vector<double> scores =
      problem.Scores(state.labels, config.num_groups, record.vertex,
                     config.alpha, config.mode);
  std::vector<int> order(config.num_groups);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&scores](int a, int b) { return scores[a] > scores[b]; });

  const double greedy_probability =
      static_cast<double>(state.iteration) / config.num_iterations;
  if (random.Unit() < greedy_probability) {
    record.outcome = StepOutcome::kGreedy;
    record.to = order.front();
  } else {
    record.outcome = StepOutcome::kRandom;
    record.to = random.Group(config.num_groups);
  }

  if (record.to != record.from) {
    state.labels[record.vertex] = record.to;
    if (problem.is_x(record.vertex)) {
      --state.x_count[record.from];
      ++state.x_count[record.to];
    } else {
      --state.z_count[record.from];
      ++state.z_count[record.to];
    }
  }
  ++state.iteration;
  return record;
}

std::vector<std::vector<int>> GroupingResult::XGroups() const {
  std::vector<std::vector<int>> groups(members.size());
  for (size_t g = 0; g < members.size(); ++g) {
    for (int v : members[g]) {
      if (v < num_x) groups[g].push_back(v);
    }
  }
  return groups;
}

double GroupingResult::MaxGroupFraction() const {
  int largest = 0;
  for (const auto& group : XGroups()) {
    largest = std::max(largest, static_cast<int>(group.size()));
  }
  return num_x == 0 ? 0.0 : static_cast<double>(largest) / num_x;
}

GroupingResult SummarizeLabels(const GroupingProblem& problem,
                               const std::vector<int>& labels,
                               const GroupingConfig& config,
                               const TraceSummary& trace) {
  GroupingResult result;
  result.num_x = problem.num_x();
  result.num_groups = config.num_groups;
  result.labels = labels;
  result.trace = trace;
  result.members.resize(config.num_groups);
  result.groups.resize(config.num_groups);
  GroupingState state;
  state.labels = labels;
  state.x_count.assign(config.num_groups, 0);
  state.z_count.assign(config.num_groups, 0);
  for (int v = 0; v < problem.num_vertices(); ++v) {
    const int g = labels[v];
    if (g < 0 || g >= config.num_groups) {
      throw InvalidArgumentError("label out of range");
    }
    result.members[g].push_back(v);
    if (problem.is_x(v)) {
      ++state.x_count[g];
    } else {
      ++state.z_count[g];
    }
  }
  result.all_minimums_met = true;
  for (int g = 0; g < config.num_groups; ++g) {
    GroupSummary& summary = result.groups[g];
    summary.x_count = state.x_count[g];
    summary.z_count = state.z_count[g];
    summary.meets_minimum =
        summary.x_count >= config.min_x && summary.z_count >= config.min_z;
    summary.x_exceeds_z = summary.x_count > summary.z_count;
    result.all_minimums_met &= summary.meets_minimum;
    if (!summary.x_exceeds_z) ++result.groups_without_x_majority;
  }

  int movable = 0;
  int optimal = 0;
  for (int v = 0; v < problem.num_vertices(); ++v) {
    if (!IsMovable(problem, state, config, v)) continue;
    ++movable;
    const auto scores = problem.Scores(labels, config.num_groups, v,
                                       config.alpha, config.mode);
    const double best = *std::max_element(scores.begin(), scores.end());
    if (scores[labels[v]] >= best) ++optimal;
  }
  result.local_optimality =
      movable == 0 ? 1.0 : static_cast<double>(optimal) / movable;
  return result;
}

GroupingResult Run(const RelationalGraph& graph, const GroupingConfig& config) {
  return Run(GroupingProblem(graph), config);
}

GroupingResult Run(const GroupingProblem& problem,
                   const GroupingConfig& config) {
  GroupingState state = InitializeGroups(problem, config, config.seed);
  // Separate stream for the move draws.
  std::seed_seq sequence{config.seed, uint64_t{1}};
  std::mt19937_64 engine(sequence);
  MersenneStepRandom random(engine());

  TraceSummary trace;
  while (state.iteration < config.num_iterations) {
    const StepRecord record = Step(state, problem, config, random);
    ++trace.picks;
    switch (record.outcome) {
      case StepOutcome::kBlocked:
        ++trace.blocked;
        break;
      case StepOutcome::kGreedy:
        ++trace.greedy;
        break;
      case StepOutcome::kRandom:
        ++trace.random;
        break;
    }
    if (record.to != record.from) ++trace.changed;
    if (record.outcome == StepOutcome::kBlocked &&
        !config.count_blocked_iterations) {
      bool any = false;
      for (int v = 0; v < problem.num_vertices() && !any; ++v) {
        any = IsMovable(problem, state, config, v);
      }
      if (!any) {
        trace.stalled = true;
        break;
      }
    }
  }
  return SummarizeLabels(problem, state.labels, config, trace);
}

nlohmann::json GroupingConfigToJson(const GroupingConfig& config) {
  return {{"num_groups", config.num_groups},
          {"min_x", config.min_x},
          {"min_z", config.min_z},
          {"num_iterations", config.num_iterations},
          {"alpha", config.alpha},
          {"mode", std::string(EvalModeName(config.mode))},
          {"seed", config.seed},
          {"count_blocked_iterations", config.count_blocked_iterations}};
}

GroupingConfig GroupingConfigFromJson(const nlohmann::json& json,
                                      GroupingConfig defaults) {
  GroupingConfig config = defaults;
  config.num_groups = json.value("num_groups", config.num_groups);
  config.min_x = json.value("min_x", config.min_x);
  config.min_z = json.value("min_z", config.min_z);
  config.num_iterations = json.value("num_iterations", config.num_iterations);
  config.alpha = json.value("alpha", config.alpha);
  if (json.contains("mode")) {
    config.mode = ParseEvalMode(json.at("mode").get<std::string>());
  }
  config.seed = json.value("seed", config.seed);
  config.count_blocked_iterations =
      json.value("count_blocked_iterations", config.count_blocked_iterations);
  return config;
}

nlohmann::json ResultToJson(const GroupingResult& result) {
  nlohmann::json json;
  json["num_x"] = result.num_x;
  json["num_groups"] = result.num_groups;
  json["labels"] = result.labels;
  json["members"] = result.members;
  auto& groups = json["groups"] = nlohmann::json::array();
  for (const auto& g : result.groups) {
    groups.push_back({{"x_count", g.x_count},
                      {"z_count", g.z_count},
                      {"meets_minimum", g.meets_minimum},
                      {"x_exceeds_z", g.x_exceeds_z}});
  }
  json["all_minimums_met"] = result.all_minimums_met;
  json["groups_without_x_majority"] = result.groups_without_x_majority;
  json["local_optimality"] = result.local_optimality;
  json["max_group_fraction"] = result.MaxGroupFraction();
  json["trace"] = {{"picks", result.trace.picks},
                   {"blocked", result.trace.blocked},
                   {"greedy", result.trace.greedy},
                   {"random", result.trace.random},
                   {"changed", result.trace.changed},
                   {"stalled", result.trace.stalled}};
  return json;
}

GroupingResult ResultFromJson(const nlohmann::json& json) {
  try {
    GroupingResult result;
    result.num_x = json.at("num_x").get<int>();
    result.num_groups = json.at("num_groups").get<int>();
    result.labels = json.at("labels").get<std::vector<int>>();
    result.members.assign(result.num_groups, {});
    for (size_t v = 0; v < result.labels.size(); ++v) {
      const int g = result.labels[v];
      if (g < 0 || g >= result.num_groups) {
        throw ParseError("label out of range in result document", 0, 0);
      }
      result.members[g].push_back(static_cast<int>(v));
    }
    for (const auto& g : json.value("groups", nlohmann::json::array())) {
      result.groups.push_back({g.at("x_count").get<int>(),
                               g.at("z_count").get<int>(),
                               g.at("meets_minimum").get<bool>(),
                               g.at("x_exceeds_z").get<bool>()});
    }
    result.all_minimums_met = json.value("all_minimums_met", false);
    result.groups_without_x_majority =
        json.value("groups_without_x_majority", 0);
    result.local_optimality = json.value("local_optimality", 0.0);
    if (json.contains("trace")) {
      const auto& t = json.at("trace");
      result.trace.picks = t.value("picks", int64_t{0});
      result.trace.blocked = t.value("blocked", int64_t{0});
      result.trace.greedy = t.value("greedy", int64_t{0});
      result.trace.random = t.value("random", int64_t{0});
      result.trace.changed = t.value("changed", int64_t{0});
      result.trace.stalled = t.value("stalled", false);
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed result document: ") + e.what(), 0,
                     0);
  }
}

}  // namespace redungroup
