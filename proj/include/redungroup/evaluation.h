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

#ifndef REDUNGROUP_EVALUATION_H_
#define REDUNGROUP_EVALUATION_H_

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "redungroup/robot.h"

namespace redungroup {

// Reference grouping. A polyarticular muscle may be listed in both of its
// groups; either way its dual membership makes it optional in each.
struct GroundTruth {
  std::vector<std::vector<int>> groups;
  std::map<int, std::pair<int, int>> dual_memberships;

  static GroundTruth FromRobot(const RobotModel& robot);

  // Muscles belonging only to group g.
  std::set<int> Core(int g) const;
  // Core plus the dual muscles that list g.
  std::set<int> Wide(int g) const;
  std::set<int> Universe() const;
};

// |core \ proposed| + |proposed \ wide|.
int Mismatch(const std::set<int>& core, const std::set<int>& wide,
             const std::set<int>& proposed);
int Mismatch(const GroundTruth& truth, int group, const std::set<int>& proposed);

enum class MatchingRule {
  kExistence,  // each truth group looks for any proposed group
  kBijective,  // proposed groups may be claimed by one truth group only
};

struct ConsistencyReport {
  double a0 = 0.0;  // percent of truth groups matched with 0 mismatches
  double a1 = 0.0;
  double a2 = 0.0;
  std::vector<int> best_match;     // per truth group, proposed group index
  std::vector<int> best_mismatch;  // per truth group

  double at(int tolerance) const;
};

// Compares proposed x-vertex groups (muscle ids) against the truth.
// Throws InvalidArgumentError if the muscle universes differ.
ConsistencyReport Consistency(const std::vector<std::vector<int>>& proposed,
                              const GroundTruth& truth,
                              MatchingRule rule = MatchingRule::kExistence);

// Mean and population variance of A0/A1/A2 across repeated trials.
struct TrialStats {
  std::vector<std::array<double, 3>> trials;  // per trial: A0, A1, A2
  std::array<double, 3> mean{};
  std::array<double, 3> variance{};

  static TrialStats FromTrials(std::vector<std::array<double, 3>> trials);
  int count() const { return static_cast<int>(trials.size()); }
};

nlohmann::json ConsistencyToJson(const ConsistencyReport& report);
nlohmann::json TrialStatsToJson(const TrialStats& stats);

}  // namespace redungroup

#endif  // REDUNGROUP_EVALUATION_H_
