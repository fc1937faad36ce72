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

#include "redungroup/robot.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

// Base plus one child link hinged about z at the origin.
RobotModel OneHinge(std::vector<ViaPoint> via_points) {
  RobotModel robot;
  robot.links.push_back({-1, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()});
  robot.links.push_back({0, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()});
  robot.joint_limits.push_back({-1.0, 1.0});
  robot.muscles.push_back({0, std::move(via_points)});
  robot.truth_groups = {{0}};
  return robot;
}

SynthSpec Spec(int chains, int joints, int pairs, int poly) {
  SynthSpec spec;
  spec.chains = chains;
  spec.joints_per_chain = joints;
  spec.antagonist_pairs_per_joint = pairs;
  spec.polyarticular_count = poly;
  return spec;
}

int JointOfPair(const RobotModel& robot, int a, int b) {
  for (size_t g = 0; g < robot.truth_groups.size(); ++g) {
    const auto& group = robot.truth_groups[g];
    if (std::find(group.begin(), group.end(), a) != group.end() &&
        std::find(group.begin(), group.end(), b) != group.end()) {
      return static_cast<int>(g);
    }
  }
  return -1;
}

TEST(SyntheticRobot, MinimalPair) {
  const RobotModel robot = BuildSyntheticRobot(Spec(1, 1, 1, 0));
  EXPECT_EQ(robot.num_muscles(), 2);
  EXPECT_EQ(robot.truth_groups.size(), 1u);
  EXPECT_TRUE(robot.dual_memberships.empty());
  EXPECT_NO_THROW(robot.Validate());
}

TEST(SyntheticRobot, DefaultCounts) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  EXPECT_EQ(robot.num_muscles(), 28);
  EXPECT_EQ(robot.num_joints(), 12);
  EXPECT_EQ(robot.truth_groups.size(), 12u);
  EXPECT_EQ(robot.dual_memberships.size(), 4u);
  EXPECT_NO_THROW(robot.Validate());
}

TEST(SyntheticRobot, TwoPairsPerJoint) {
  const RobotModel robot = BuildSyntheticRobot(Spec(2, 2, 2, 0));
  EXPECT_EQ(robot.num_muscles(), 16);
  ASSERT_EQ(robot.truth_groups.size(), 4u);
  for (const auto& group : robot.truth_groups) EXPECT_EQ(group.size(), 4u);
}

TEST(SyntheticRobot, MuscleCountFormula) {
  for (int chains = 1; chains <= 3; ++chains) {
    for (int joints = 2; joints <= 3; ++joints) {
      for (int pairs = 1; pairs <= 2; ++pairs) {
        const SynthSpec spec = Spec(chains, joints, pairs, chains);
        EXPECT_EQ(BuildSyntheticRobot(spec).num_muscles(), spec.muscle_count());
      }
    }
  }
}

TEST(SyntheticRobot, RejectsEmptySpecs) {
  EXPECT_THROW(BuildSyntheticRobot(Spec(0, 3, 1, 0)), InvalidArgumentError);
  EXPECT_THROW(BuildSyntheticRobot(Spec(4, 0, 1, 0)), InvalidArgumentError);
  EXPECT_THROW(BuildSyntheticRobot(Spec(4, 3, 1, -1)), InvalidArgumentError);
}

TEST(SyntheticRobot, SameSeedSameJson) {
  SynthSpec spec;
  spec.seed = 17;
  EXPECT_EQ(RobotToJson(BuildSyntheticRobot(spec)).dump(),
            RobotToJson(BuildSyntheticRobot(spec)).dump());
}

TEST(SyntheticRobot, JsonRoundTrip) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const RobotModel back = RobotFromJson(RobotToJson(robot));
  EXPECT_EQ(RobotToJson(back).dump(), RobotToJson(robot).dump());
  EXPECT_EQ(back.dual_memberships, robot.dual_memberships);
}

TEST(SyntheticRobot, DualMembersListedInBothGroups) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  for (const auto& [id, groups] : robot.dual_memberships) {
    for (int g : {groups.first, groups.second}) {
      const auto& members = robot.truth_groups[g];
      EXPECT_NE(std::find(members.begin(), members.end(), id), members.end());
    }
  }
}

TEST(Kinematics, ZeroPoseKeepsReferencePoints) {
  const RobotModel robot = OneHinge({{0, {-1, 0, 0}}, {1, {1, 0.5, 0}}});
  const auto points = ForwardKinematics(robot, JointConfig{{0.0}});
  EXPECT_TRUE(points[0][0].isApprox(Eigen::Vector3d(-1, 0, 0)));
  EXPECT_TRUE(points[0][1].isApprox(Eigen::Vector3d(1, 0.5, 0)));
}

TEST(Kinematics, HalfTurn) {
  const RobotModel robot = OneHinge({{0, {0, 1, 0}}, {1, {1, 0, 0}}});
  const auto points = ForwardKinematics(robot, JointConfig{{std::numbers::pi}});
  EXPECT_NEAR((points[0][1] - Eigen::Vector3d(-1, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(Kinematics, QuarterTurn) {
  const RobotModel robot = OneHinge({{0, {0, -1, 0}}, {1, {1, 0, 0}}});
  const auto points =
      ForwardKinematics(robot, JointConfig{{std::numbers::pi / 2}});
  EXPECT_NEAR((points[0][1] - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-12);
}

TEST(Kinematics, WrongAngleCountThrows) {
  const RobotModel robot = OneHinge({{0, {-1, 0, 0}}, {1, {1, 0, 0}}});
  EXPECT_THROW(ForwardKinematics(robot, JointConfig{{0.0, 0.0}}),
               InvalidArgumentError);
}

TEST(MuscleLength, StraightAndBent) {
  const RobotModel robot = OneHinge({{0, {-1, 0, 0}}, {1, {1, 0, 0}}});
  EXPECT_DOUBLE_EQ(MuscleLengths(robot, JointConfig{{0.0}})[0], 2.0);
  EXPECT_NEAR(MuscleLengths(robot, JointConfig{{std::numbers::pi / 2}})[0],
              std::sqrt(2.0), 1e-12);
}

TEST(MuscleLength, ThreeViaPoints) {
  const RobotModel robot =
      OneHinge({{0, {-1, 0, 0}}, {1, {0, 0, 0}}, {1, {1, 0, 0}}});
  EXPECT_DOUBLE_EQ(MuscleLengths(robot, JointConfig{{0.0}})[0], 2.0);
}

TEST(Sampling, ZeroWidthLimitsGiveReferenceLengths) {
  RobotModel robot = OneHinge({{0, {-1, 0, 0}}, {1, {1, 0, 0}}});
  robot.joint_limits[0] = {0.0, 0.0};
  const Dataset data = SampleRandomPostures(robot, 1, 3);
  ASSERT_EQ(data.rows(), 1);
  EXPECT_DOUBLE_EQ(data.values(0, 0), 2.0);
}

TEST(Sampling, ShapeDeterminismAndLimits) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const Dataset a = SampleRandomPostures(robot, 500, 9);
  const Dataset b = SampleRandomPostures(robot, 500, 9);
  EXPECT_EQ(a.rows(), 500);
  EXPECT_EQ(a.cols(), 28);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, SampleRandomPostures(robot, 500, 10).values);
  EXPECT_THROW(SampleRandomPostures(robot, 0, 1), InvalidArgumentError);
}

TEST(Sampling, FullScaleShape) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const Dataset data = SampleRandomPostures(robot, 100000, 1);
  EXPECT_EQ(data.rows(), 100000);
  EXPECT_EQ(data.cols(), robot.num_muscles());
  EXPECT_TRUE(data.values.allFinite());
}

TEST(Distances, MidpointGeometry) {
  RobotModel robot = OneHinge({{0, {-1, 0, 0}}, {1, {1, 0, 0}}});
  robot.muscles.push_back({1, {{0, {-0.7, 0, 0}}, {1, {1.3, 0, 0}}}});
  const Eigen::MatrixXd d = SpatialDistanceMatrix(robot, JointConfig{{0.0}});
  EXPECT_DOUBLE_EQ(d(0, 0), 0.0);
  EXPECT_NEAR(d(0, 1), 0.3, 1e-12);
  EXPECT_NEAR(d(1, 0), 0.3, 1e-12);
}

TEST(Distances, CentroidDiffersFromMidpointOnBentPath) {
  RobotModel robot =
      OneHinge({{0, {0, 0, 0}}, {1, {0.1, 0, 0}}, {1, {3, 0, 0}}});
  robot.muscles.push_back({1, {{0, {0, 0, 0}}, {1, {0.1, 0, 0}}}});
  const JointConfig q{{0.0}};
  const double midpoint =
      SpatialDistanceMatrix(robot, q, PathCenter::kArcLengthMidpoint)(0, 1);
  const double centroid =
      SpatialDistanceMatrix(robot, q, PathCenter::kViaPointCentroid)(0, 1);
  EXPECT_NEAR(midpoint, 1.5 - 0.05, 1e-12);
  EXPECT_NEAR(centroid, 3.1 / 3.0 - 0.05, 1e-12);
}

// Metric properties on the default robot, both center definitions.
TEST(DistanceProperties, MetricAxioms) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  for (PathCenter center :
       {PathCenter::kArcLengthMidpoint, PathCenter::kViaPointCentroid}) {
    const Eigen::MatrixXd d =
        SpatialDistanceMatrix(robot, SpreadPose(robot), center);
    const int m = static_cast<int>(d.rows());
    for (int i = 0; i < m; ++i) {
      EXPECT_EQ(d(i, i), 0.0);
      for (int j = 0; j < m; ++j) {
        EXPECT_GE(d(i, j), 0.0);
        EXPECT_EQ(d(i, j), d(j, i));
        for (int k = 0; k < m; ++k) {
          EXPECT_LE(d(i, k), d(i, j) + d(j, k) + 1e-12);
        }
      }
    }
  }
}

// Perturbing a pair's joint moves the two lengths in opposite directions.
TEST(RobotProperties, AntagonistPairsOppose) {
  for (uint64_t seed : {0u, 1u, 2u}) {
    SynthSpec spec = Spec(3, 3, 2, 3);
    spec.seed = seed;
    const RobotModel robot = BuildSyntheticRobot(spec);
    ASSERT_FALSE(robot.antagonist_pairs.empty());
    std::mt19937_64 rng(seed + 100);
    for (int trial = 0; trial < 20; ++trial) {
      JointConfig q{std::vector<double>(robot.num_joints())};
      for (int j = 0; j < robot.num_joints(); ++j) {
        const auto& limit = robot.joint_limits[j];
        q.angles[j] =
            std::uniform_real_distribution<double>(limit.lower, limit.upper)(rng);
      }
      const Eigen::VectorXd base = MuscleLengths(robot, q);
      for (const auto& [a, b] : robot.antagonist_pairs) {
        const int joint = JointOfPair(robot, a, b);
        ASSERT_GE(joint, 0);
        const auto& limit = robot.joint_limits[joint];
        JointConfig moved = q;
        const double target = std::uniform_real_distribution<double>(
            limit.lower, limit.upper)(rng);
        if (std::abs(target - q.angles[joint]) < 1e-6) continue;
        moved.angles[joint] = target;
        const Eigen::VectorXd after = MuscleLengths(robot, moved);
        const double da = after[a] - base[a];
        const double db = after[b] - base[b];
        EXPECT_LT(da * db, 0.0) << "pair " << a << "," << b;
      }
    }
  }
}

// |l(q + delta e_j) - l(q)| stays below the summed link length times |delta|.
TEST(RobotProperties, LengthsAreLipschitz) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  double total_link = 0.0;
  for (const auto& link : robot.links) total_link += link.offset.norm();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    JointConfig q{std::vector<double>(robot.num_joints())};
    for (double& angle : q.angles) angle = unit(rng);
    const Eigen::VectorXd base = MuscleLengths(robot, q);
    for (int j = 0; j < robot.num_joints(); ++j) {
      for (double delta : {1e-3, -1e-3, 5e-2}) {
        JointConfig moved = q;
        moved.angles[j] += delta;
        const double change =
            (MuscleLengths(robot, moved) - base).cwiseAbs().maxCoeff();
        EXPECT_LE(change, total_link * std::abs(delta));
      }
    }
  }
}

}  // namespace
}  // namespace redungroup
