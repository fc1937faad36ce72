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

#ifndef REDUNGROUP_GROUPING_H_
#define REDUNGROUP_GROUPING_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "redungroup/relational_graph.h"

namespace redungroup {

// Which edge families enter the move score.
enum class EvalMode { kFunc, kSpac, kBoth };

std::string_view EvalModeName(EvalMode mode);
// Accepts "func", "spac", "both" in any case.
EvalMode ParseEvalMode(std::string_view name);

struct GroupingConfig {
  int num_groups = 14;
  int min_x = 2;
  int min_z = 1;
  int num_iterations = 30000;
  double alpha = 10.0;
  EvalMode mode = EvalMode::kBoth;
  uint64_t seed = 0;
  // When set, constraint-blocked picks also advance the annealing counter.
  bool count_blocked_iterations = false;

  // Throws InvalidArgumentError if no labeling can satisfy the quotas.
  void Validate(int num_x, int num_z) const;
};

struct GroupingState {
  std::vector<int> labels;  // per vertex, in [0, num_groups)
  std::vector<int> x_count;
  std::vector<int> z_count;
  int iteration = 0;
};

// Move score of one vertex against one group:
//   mean(functional) + alpha * sum(spatial)
// with an empty functional set contributing 0. kFunc drops the spatial term,
// kSpac drops the functional term.
double CalcEval(std::span<const double> functional,
                std::span<const double> spatial, double alpha, EvalMode mode);

// Dense lookup tables over a relational graph, shared read-only by runs.
class GroupingProblem {
 public:
  explicit GroupingProblem(const RelationalGraph& graph);

  int num_x() const { return num_x_; }
  int num_z() const { return num_z_; }
  int num_vertices() const { return num_x_ + num_z_; }
  bool is_x(int vertex) const { return vertex < num_x_; }

  // CalcEval of `vertex` against every group under `labels`. The vertex's
  // own edge set never includes itself.
  std::vector<double> Scores(const std::vector<int>& labels, int num_groups,
                             int vertex, double alpha, EvalMode mode) const;

 private:
  int num_x_;
  int num_z_;
  Eigen::MatrixXd functional_;  // num_z x num_x
  Eigen::MatrixXd spatial_;     // num_x x num_x
};

// Random draws consumed by Step, injectable for tests.
class StepRandom {
 public:
  virtual ~StepRandom() = default;
  virtual int Vertex(int count) = 0;  // uniform in [0, count)
  virtual double Unit() = 0;          // uniform in [0, 1)
  virtual int Group(int count) = 0;   // uniform in [0, count)
};

class MersenneStepRandom : public StepRandom {
 public:
  explicit MersenneStepRandom(uint64_t seed) : rng_(seed) {}
  int Vertex(int count) override;
  double Unit() override;
  int Group(int count) override;

 private:
  std::mt19937_64 rng_;
};

enum class StepOutcome { kBlocked, kGreedy, kRandom };

struct StepRecord {
  int vertex = -1;
  StepOutcome outcome = StepOutcome::kBlocked;
  int from = -1;
  int to = -1;
};

// Quota-filling random initialization: every group receives min_x x-vertices
// and min_z z-vertices from a seeded shuffle; the remainder is spread
// uniformly, z-vertices only into groups keeping x_count > z_count.
GroupingState InitializeGroups(const GroupingProblem& problem,
                               const GroupingConfig& config, uint64_t seed);

// True when moving `vertex` out of its group is allowed.
bool IsMovable(const GroupingProblem& problem, const GroupingState& state,
               const GroupingConfig& config, int vertex);

// One randomized move. A vertex whose group sits at a minimum is left alone.
// Otherwise with probability iteration / num_iterations it joins the
// best-scoring group (ties to the lowest index), else a uniform random group.
StepRecord Step(GroupingState& state, const GroupingProblem& problem,
                const GroupingConfig& config, StepRandom& random);

struct GroupSummary {
  int x_count = 0;
  int z_count = 0;
  bool meets_minimum = false;
  bool x_exceeds_z = false;
};

struct TraceSummary {
  int64_t picks = 0;
  int64_t blocked = 0;
  int64_t greedy = 0;
  int64_t random = 0;
  int64_t changed = 0;
  bool stalled = false;  // stopped early: no vertex could move
};

struct GroupingResult {
  int num_x = 0;
  int num_groups = 0;
  std::vector<int> labels;
  std::vector<std::vector<int>> members;  // vertex ids per group, ascending
  std::vector<GroupSummary> groups;
  bool all_minimums_met = false;
  int groups_without_x_majority = 0;
  // Share of movable vertices already sitting in a top-scoring group.
  double local_optimality = 0.0;
  TraceSummary trace;

  // x-vertex members of each group.
  std::vector<std::vector<int>> XGroups() const;
  // Largest x-vertex count of any group divided by num_x.
  double MaxGroupFraction() const;
};

GroupingResult Run(const RelationalGraph& graph, const GroupingConfig& config);
GroupingResult Run(const GroupingProblem& problem, const GroupingConfig& config);

// Builds the reported result for a finished labeling.
GroupingResult SummarizeLabels(const GroupingProblem& problem,
                               const std::vector<int>& labels,
                               const GroupingConfig& config,
                               const TraceSummary& trace);

// Single-linkage merging in decreasing edge weight (Kruskal order) over the
// combined edge set until `num_groups` components remain. No size limits.
// Throws InvalidArgumentError if the graph cannot be merged that far.
GroupingResult BaselineKruskalMerge(const RelationalGraph& graph,
                                    int num_groups);

nlohmann::json GroupingConfigToJson(const GroupingConfig& config);
GroupingConfig GroupingConfigFromJson(const nlohmann::json& json,
                                      GroupingConfig defaults = {});
nlohmann::json ResultToJson(const GroupingResult& result);
GroupingResult ResultFromJson(const nlohmann::json& json);

}  // namespace redungroup

#endif  // REDUNGROUP_GROUPING_H_
