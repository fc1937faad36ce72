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

#include "redungroup/evaluation.h"

#include <algorithm>
#include <limits>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

// Kuhn's augmenting-path matching of truth groups onto proposed groups.
bool Augment(int truth, const std::vector<std::vector<int>>& allowed,
             std::vector<int>& owner, std::vector<bool>& visited) {
  for (int p : allowed[truth]) {
    if (visited[p]) continue;
    visited[p] = true;
    if (owner[p] < 0 || Augment(owner[p], allowed, owner, visited)) {
      owner[p] = truth;
      return true;
    }
  }
  return false;
}

}  // namespace

GroundTruth GroundTruth::FromRobot(const RobotModel& robot) {
  return GroundTruth{robot.truth_groups, robot.dual_memberships};
}

std::set<int> GroundTruth::Wide(int g) const {
  std::set<int> wide(groups.at(g).begin(), groups.at(g).end());
  for (const auto& [id, pair] : dual_memberships) {
    if (pair.first == g || pair.second == g) wide.insert(id);
  }
  return wide;
}

std::set<int> GroundTruth::Core(int g) const {
  std::set<int> core;
  for (int id : groups.at(g)) {
    if (!dual_memberships.contains(id)) core.insert(id);
  }
  return core;
}

std::set<int> GroundTruth::Universe() const {
  std::set<int> all;
  for (const auto& group : groups) all.insert(group.begin(), group.end());
  for (const auto& [id, pair] : dual_memberships) all.insert(id);
  return all;
}

int Mismatch(const std::set<int>& core, const std::set<int>& wide,
             const std::set<int>& proposed) {
  int count = 0;
  for (int id : core) count += proposed.contains(id) ? 0 : 1;
  for (int id : proposed) count += wide.contains(id) ? 0 : 1;
  return count;
}

int Mismatch(const GroundTruth& truth, int group,
             const std::set<int>& proposed) {
  return Mismatch(truth.Core(group), truth.Wide(group), proposed);
}

double ConsistencyReport::at(int tolerance) const {
  switch (tolerance) {
    case 0:
      return a0;
    case 1:
      return a1;
    case 2:
      return a2;
    default:
      throw InvalidArgumentError("tolerance must be 0, 1 or 2");
  }
}

ConsistencyReport Consistency(const std::vector<std::vector<int>>& proposed,
                              const GroundTruth& truth, MatchingRule rule) {
  std::set<int> proposed_universe;
  std::vector<std::set<int>> proposed_sets;
  for (const auto& group : proposed) {
    proposed_sets.emplace_back(group.begin(), group.end());
    proposed_universe.insert(group.begin(), group.end());
  }
  if (proposed_universe != truth.Universe()) {
    throw InvalidArgumentError(
        "proposed grouping and ground truth cover different muscles");
  }
  const int num_truth = static_cast<int>(truth.groups.size());
  const int num_proposed = static_cast<int>(proposed_sets.size());
  if (num_truth == 0) throw InvalidArgumentError("ground truth is empty");

  // mismatch[t][p]
  std::vector<std::vector<int>> mismatch(num_truth,
                                         std::vector<int>(num_proposed));
  ConsistencyReport report;
  report.best_match.assign(num_truth, -1);
  report.best_mismatch.assign(num_truth, std::numeric_limits<int>::max());
  for (int t = 0; t < num_truth; ++t) {
    const std::set<int> core = truth.Core(t);
    const std::set<int> wide = truth.Wide(t);
    for (int p = 0; p < num_proposed; ++p) {
      mismatch[t][p] = Mismatch(core, wide, proposed_sets[p]);
      if (mismatch[t][p] < report.best_mismatch[t]) {
        report.best_mismatch[t] = mismatch[t][p];
        report.best_match[t] = p;
      }
    }
  }

  std::array<double, 3> rates{};
  for (int k = 0; k <= 2; ++k) {
    int matched = 0;
    if (rule == MatchingRule::kExistence) {
      for (int t = 0; t < num_truth; ++t) {
        matched += report.best_mismatch[t] <= k ? 1 : 0;
      }
    } else {
      std::vector<std::vector<int>> allowed(num_truth);
      for (int t = 0; t < num_truth; ++t) {
        for (int p = 0; p < num_proposed; ++p) {
          if (mismatch[t][p] <= k) allowed[t].push_back(p);
        }
      }
      std::vector<int> owner(num_proposed, -1);
      for (int t = 0; t < num_truth; ++t) {
        std::vector<bool> visited(num_proposed, false);
        if (Augment(t, allowed, owner, visited)) ++matched;
      }
    }
    rates[k] = 100.0 * matched / num_truth;
  }
  report.a0 = rates[0];
  report.a1 = rates[1];
  report.a2 = rates[2];
  return report;
}

TrialStats TrialStats::FromTrials(std::vector<std::array<double, 3>> trials) {
  TrialStats stats;
  stats.trials = std::move(trials);
  const double n = static_cast<double>(stats.trials.size());
  if (stats.trials.empty()) return stats;
  for (int k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (const auto& t : stats.trials) sum += t[k];
    stats.mean[k] = sum / n;
    double squares = 0.0;
    for (const auto& t : stats.trials) {
      squares += (t[k] - stats.mean[k]) * (t[k] - stats.mean[k]);
    }
    stats.variance[k] = squares / n;
  }
  return stats;
}

nlohmann::json ConsistencyToJson(const ConsistencyReport& report) {
  return {{"A0", report.a0},
          {"A1", report.a1},
          {"A2", report.a2},
          {"best_match", report.best_match},
          {"best_mismatch", report.best_mismatch}};
}

nlohmann::json TrialStatsToJson(const TrialStats& stats) {
  nlohmann::json json;
  json["trials"] = stats.count();
  json["mean"] = {{"A0", stats.mean[0]}, {"A1", stats.mean[1]},
                  {"A2", stats.mean[2]}};
  json["variance"] = {{"A0", stats.variance[0]}, {"A1", stats.variance[1]},
                      {"A2", stats.variance[2]}};
  json["per_trial"] = stats.trials;
  return json;
}

}  // namespace redungroup
