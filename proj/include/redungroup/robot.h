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

#ifndef REDUNGROUP_ROBOT_H_
#define REDUNGROUP_ROBOT_H_

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "json.hpp"
#include "redungroup/dataset.h"

namespace redungroup {

// A rigid link. Link 0 is the fixed base (parent -1). Every other link is
// attached to its parent through one hinge joint located at `offset` in the
// parent frame; joint index = link index - 1.
struct Link {
  int parent = -1;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

struct JointLimit {
  double lower = 0.0;
  double upper = 0.0;
};

struct ViaPoint {
  int link = 0;
  Eigen::Vector3d local = Eigen::Vector3d::Zero();
};

// Piecewise-linear muscle routed through via points fixed on links.
struct MusclePath {
  int id = 0;
  std::vector<ViaPoint> via_points;
};

struct JointConfig {
  std::vector<double> angles;
};

struct RobotModel {
  std::vector<Link> links;
  std::vector<JointLimit> joint_limits;
  std::vector<MusclePath> muscles;
  // One group per joint: every muscle crossing that joint. Polyarticular
  // muscles are listed in both of their groups.
  std::vector<std::vector<int>> truth_groups;
  // Polyarticular muscle id -> (group index, group index).
  std::map<int, std::pair<int, int>> dual_memberships;
  // Antagonist pairs of monoarticular muscles, by muscle index.
  std::vector<std::pair<int, int>> antagonist_pairs;

  int num_joints() const { return static_cast<int>(links.size()) - 1; }
  int num_muscles() const { return static_cast<int>(muscles.size()); }

  // Throws InvalidArgumentError when a structural invariant is violated.
  void Validate() const;
};

// Parameters of the procedurally generated robot: `chains` limbs radiating
// from the base, each a serial chain of hinge joints.
struct SynthSpec {
  int chains = 4;
  int joints_per_chain = 3;
  int antagonist_pairs_per_joint = 1;
  int polyarticular_count = 4;
  double link_length = 0.3;  // meters
  uint64_t seed = 0;

  int muscle_count() const {
    return chains * joints_per_chain * 2 * antagonist_pairs_per_joint +
           polyarticular_count;
  }
};

enum class PathCenter { kArcLengthMidpoint, kViaPointCentroid };

RobotModel BuildSyntheticRobot(const SynthSpec& spec);

// World transform of every link (index 0 is the base at the origin).
std::vector<Eigen::Isometry3d> LinkFrames(const RobotModel& robot,
                                          const JointConfig& q);

// World position of every via point, grouped per muscle.
std::vector<std::vector<Eigen::Vector3d>> ForwardKinematics(
    const RobotModel& robot, const JointConfig& q);

Eigen::VectorXd MuscleLengths(const RobotModel& robot, const JointConfig& q);

// n postures with every joint drawn uniformly within its limits.
Dataset SampleRandomPostures(const RobotModel& robot, int n, uint64_t seed);

// All joints at the midpoint of their range.
JointConfig SpreadPose(const RobotModel& robot);

Eigen::MatrixXd SpatialDistanceMatrix(
    const RobotModel& robot, const JointConfig& reference,
    PathCenter center = PathCenter::kArcLengthMidpoint);

nlohmann::json RobotToJson(const RobotModel& robot);
RobotModel RobotFromJson(const nlohmann::json& json);

nlohmann::json SynthSpecToJson(const SynthSpec& spec);
SynthSpec SynthSpecFromJson(const nlohmann::json& json,
                            SynthSpec defaults = {});

}  // namespace redungroup

#endif  // REDUNGROUP_ROBOT_H_
