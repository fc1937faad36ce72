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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "redungroup/errors.h"

namespace redungroup {
namespace {

// Geometry of the generated limbs, as fractions of the link length.
constexpr double kBaseRadius = 1.0;
constexpr double kAttachDistance = 1.0 / 3.0;  // along the link from the joint
constexpr double kMomentArm = 1.0 / 6.0;       // lateral offset from the axis
constexpr double kJitter = 0.05;               // relative, per attachment
// Within this range both muscles of a pair stay strictly monotone in the
// joint angle for every jitter draw.
constexpr double kJointRange = std::numbers::pi / 4.0;

nlohmann::json VectorToJson(const Eigen::Vector3d& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d VectorFromJson(const nlohmann::json& json) {
  if (!json.is_array() || json.size() != 3) {
    throw ParseError("expected a 3-element array", 0, 0);
  }
  return {json[0].get<double>(), json[1].get<double>(), json[2].get<double>()};
}

double PathLength(const std::vector<Eigen::Vector3d>& points) {
  double length = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    length += (points[i] - points[i - 1]).norm();
  }
  return length;
}

Eigen::Vector3d PathCenterPoint(const std::vector<Eigen::Vector3d>& points,
                                PathCenter center) {
  if (center == PathCenter::kViaPointCentroid) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : points) sum += p;
    return sum / static_cast<double>(points.size());
  }
  const double half = 0.5 * PathLength(points);
  double walked = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    const double segment = (points[i] - points[i - 1]).norm();
    if (walked + segment >= half && segment > 0.0) {
      const double t = (half - walked) / segment;
      return points[i - 1] + t * (points[i] - points[i - 1]);
    }
    walked += segment;
  }
  return points.back();
}

void CheckConfig(const RobotModel& robot, const JointConfig& q) {
  if (static_cast<int>(q.angles.size()) != robot.num_joints()) {
    throw InvalidArgumentError(
        "joint configuration has " + std::to_string(q.angles.size()) +
        " angles but the robot has " + std::to_string(robot.num_joints()) +
        " joints");
  }
}

}  // namespace

void RobotModel::Validate() const {
  if (links.empty() || links[0].parent != -1) {
    throw InvalidArgumentError("link 0 must be the base (parent -1)");
  }
  for (size_t i = 1; i < links.size(); ++i) {
    // Parents precede children, which rules out cycles.
    if (links[i].parent < 0 || links[i].parent >= static_cast<int>(i)) {
      throw InvalidArgumentError("link " + std::to_string(i) +
                                 " has an invalid parent index");
    }
    if (std::abs(links[i].axis.norm() - 1.0) > 1e-9) {
      throw InvalidArgumentError("link " + std::to_string(i) +
                                 " hinge axis is not a unit vector");
    }
  }
  if (static_cast<int>(joint_limits.size()) != num_joints()) {
    throw InvalidArgumentError("joint limit count does not match joint count");
  }
  for (const auto& limit : joint_limits) {
    if (!(limit.lower < limit.upper)) {
      throw InvalidArgumentError("joint limits require lower < upper");
    }
  }
  const JointConfig zero{std::vector<double>(num_joints(), 0.0)};
  const auto points = ForwardKinematics(*this, zero);
  for (int m = 0; m < num_muscles(); ++m) {
    const MusclePath& muscle = muscles[m];
    if (muscle.id != m) {
      throw InvalidArgumentError("muscle ids must equal their index");
    }
    std::set<int> touched;
    for (const auto& via : muscle.via_points) touched.insert(via.link);
    if (muscle.via_points.size() < 2 || touched.size() < 2) {
      throw InvalidArgumentError("muscle " + std::to_string(m) +
                                 " needs via points on two distinct links");
    }
    for (size_t i = 1; i < points[m].size(); ++i) {
      if ((points[m][i] - points[m][i - 1]).norm() <= 0.0) {
        throw InvalidArgumentError("muscle " + std::to_string(m) +
                                   " has a zero-length segment");
      }
    }
  }
  std::vector<int> appearances(num_muscles(), 0);
  for (size_t g = 0; g < truth_groups.size(); ++g) {
    for (int id : truth_groups[g]) {
      if (id < 0 || id >= num_muscles()) {
        throw InvalidArgumentError("truth group references unknown muscle");
      }
      ++appearances[id];
    }
  }
  for (int m = 0; m < num_muscles(); ++m) {
    const auto dual = dual_memberships.find(m);
    const int expected = dual == dual_memberships.end() ? 1 : 2;
    if (appearances[m] != expected) {
      throw InvalidArgumentError(
          "muscle " + std::to_string(m) + " appears in " +
          std::to_string(appearances[m]) + " truth groups, expected " +
          std::to_string(expected));
    }
  }
  const int num_groups = static_cast<int>(truth_groups.size());
  for (const auto& [id, pair] : dual_memberships) {
    for (int g : {pair.first, pair.second}) {
      if (g < 0 || g >= num_groups) {
        throw InvalidArgumentError("dual membership names unknown group");
      }
      const auto& group = truth_groups[g];
      if (std::find(group.begin(), group.end(), id) == group.end()) {
        throw InvalidArgumentError("dual muscle missing from its group");
      }
    }
  }
}

RobotModel BuildSyntheticRobot(const SynthSpec& spec) {
  if (spec.chains < 1 || spec.joints_per_chain < 1) {
    throw InvalidArgumentError("synthetic robot needs at least one chain and "
                               "one joint per chain");
  }
  if (spec.antagonist_pairs_per_joint < 1 || spec.polyarticular_count < 0) {
    throw InvalidArgumentError("invalid muscle counts in synthetic spec");
  }
  if (spec.polyarticular_count > 0 && spec.joints_per_chain < 2) {
    throw InvalidArgumentError(
        "polyarticular muscles need at least two joints per chain");
  }
  if (!(spec.link_length > 0.0)) {
    throw InvalidArgumentError("link length must be positive");
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(1.0 - kJitter, 1.0 + kJitter);
  const double length = spec.link_length;
  const int joints = spec.joints_per_chain;

  RobotModel robot;
  robot.links.push_back(Link{});

  // Per chain and joint: link index, chain direction, in-plane normal.
  struct JointFrame {
    int link;
    Eigen::Vector3d along;
    Eigen::Vector3d normal;
    Eigen::Vector3d axis;
    Eigen::Vector3d offset;
  };
  std::vector<std::vector<JointFrame>> frames(spec.chains);
  for (int c = 0; c < spec.chains; ++c) {
    const double phi = 2.0 * std::numbers::pi * c / spec.chains;
    const Eigen::Vector3d along(std::cos(phi), std::sin(phi), 0.0);
    const Eigen::Vector3d side = Eigen::Vector3d::UnitZ().cross(along);
    int parent = 0;
    for (int k = 0; k < joints; ++k) {
      // Alternate the bending plane along the chain.
      const Eigen::Vector3d axis = k % 2 == 0 ? Eigen::Vector3d::UnitZ() : side;
      const Eigen::Vector3d offset =
          (k == 0 ? kBaseRadius * length : length) * along;
      robot.links.push_back(Link{parent, offset, axis});
      robot.joint_limits.push_back(JointLimit{-kJointRange, kJointRange});
      const int link = static_cast<int>(robot.links.size()) - 1;
      frames[c].push_back({link, along, axis.cross(along), axis, offset});
      parent = link;
    }
  }

  const int pairs = spec.antagonist_pairs_per_joint;
  robot.truth_groups.resize(spec.chains * joints);
  for (int c = 0; c < spec.chains; ++c) {
    for (int k = 0; k < joints; ++k) {
      const JointFrame& f = frames[c][k];
      const int parent = robot.links[f.link].parent;
      const int group = c * joints + k;
      for (int p = 0; p < pairs; ++p) {
        const double shift = (p - 0.5 * (pairs - 1)) * 2.0 * kMomentArm;
        int first = -1;
        for (double sign : {1.0, -1.0}) {
          const double back = kAttachDistance * length * jitter(rng);
          const double forward = kAttachDistance * length * jitter(rng);
          const double arm = kMomentArm * length * jitter(rng);
          const Eigen::Vector3d lateral =
              sign * arm * f.normal + shift * length * f.axis;
          MusclePath muscle;
          muscle.id = robot.num_muscles();
          muscle.via_points.push_back(
              {parent, f.offset - back * f.along + lateral});
          muscle.via_points.push_back({f.link, forward * f.along + lateral});
          robot.truth_groups[group].push_back(muscle.id);
          if (first < 0) {
            first = muscle.id;
          } else {
            robot.antagonist_pairs.emplace_back(first, muscle.id);
          }
          robot.muscles.push_back(std::move(muscle));
        }
      }
    }
  }

  for (int i = 0; i < spec.polyarticular_count; ++i) {
    const int c = i % spec.chains;
    const int k = (i / spec.chains) % (joints - 1);
    const double sign = (i / (spec.chains * (joints - 1))) % 2 == 0 ? 1.0 : -1.0;
    const JointFrame& first = frames[c][k];
    const JointFrame& second = frames[c][k + 1];
    const double back = kAttachDistance * length * jitter(rng);
    const double forward = kAttachDistance * length * jitter(rng);
    const double arm = kMomentArm * length * jitter(rng);
    MusclePath muscle;
    muscle.id = robot.num_muscles();
    muscle.via_points.push_back({robot.links[first.link].parent,
                                 first.offset - back * first.along +
                                     sign * arm * first.normal});
    muscle.via_points.push_back(
        {first.link, 0.5 * length * first.along +
                         sign * arm * (first.normal + second.normal)});
    muscle.via_points.push_back(
        {second.link, forward * second.along + sign * arm * second.normal});
    const int g0 = c * joints + k;
    robot.truth_groups[g0].push_back(muscle.id);
    robot.truth_groups[g0 + 1].push_back(muscle.id);
    robot.dual_memberships[muscle.id] = {g0, g0 + 1};
    robot.muscles.push_back(std::move(muscle));
  }

  robot.Validate();
  return robot;
}

std::vector<Eigen::Isometry3d> LinkFrames(const RobotModel& robot,
                                          const JointConfig& q) {
  CheckConfig(robot, q);
  std::vector<Eigen::Isometry3d> frames(robot.links.size(),
                                        Eigen::Isometry3d::Identity());
  for (size_t i = 1; i < robot.links.size(); ++i) {
    const Link& link = robot.links[i];
    frames[i] = frames[link.parent] * Eigen::Translation3d(link.offset) *
                Eigen::AngleAxisd(q.angles[i - 1], link.axis);
  }
  return frames;
}

std::vector<std::vector<Eigen::Vector3d>> ForwardKinematics(
    const RobotModel& robot, const JointConfig& q) {
  const auto frames = LinkFrames(robot, q);
  std::vector<std::vector<Eigen::Vector3d>> points(robot.muscles.size());
  for (size_t m = 0; m < robot.muscles.size(); ++m) {
    for (const ViaPoint& via : robot.muscles[m].via_points) {
      if (via.link < 0 || via.link >= static_cast<int>(frames.size())) {
        throw InvalidArgumentError("via point references unknown link");
      }
      points[m].push_back(frames[via.link] * via.local);
    }
  }
  return points;
}

Eigen::VectorXd MuscleLengths(const RobotModel& robot, const JointConfig& q) {
  const auto points = ForwardKinematics(robot, q);
  Eigen::VectorXd lengths(robot.num_muscles());
  for (int m = 0; m < robot.num_muscles(); ++m) {
    lengths[m] = PathLength(points[m]);
  }
  return lengths;
}

Dataset SampleRandomPostures(const RobotModel& robot, int n, uint64_t seed) {
  if (n < 1) throw InvalidArgumentError("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  Dataset dataset;
  dataset.values.resize(n, robot.num_muscles());
  for (const auto& muscle : robot.muscles) {
    dataset.muscle_ids.push_back(muscle.id);
  }
  JointConfig q{std::vector<double>(robot.num_joints())};
  for (int row = 0; row < n; ++row) {
    for (int j = 0; j < robot.num_joints(); ++j) {
      const JointLimit& limit = robot.joint_limits[j];
      std::uniform_real_distribution<double> angle(limit.lower, limit.upper);
      q.angles[j] = angle(rng);
    }
    dataset.values.row(row) = MuscleLengths(robot, q).transpose();
  }
  return dataset;
}

JointConfig SpreadPose(const RobotModel& robot) {
  JointConfig q;
  for (const auto& limit : robot.joint_limits) {
    q.angles.push_back(0.5 * (limit.lower + limit.upper));
  }
  return q;
}

Eigen::MatrixXd SpatialDistanceMatrix(const RobotModel& robot,
                                      const JointConfig& reference,
                                      PathCenter center) {
  const auto points = ForwardKinematics(robot, reference);
  const int m = robot.num_muscles();
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(m);
  for (const auto& path : points) centers.push_back(PathCenterPoint(path, center));
  Eigen::MatrixXd distances = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = (centers[i] - centers[j]).norm();
      distances(i, j) = d;
      distances(j, i) = d;
    }
  }
  return distances;
}

nlohmann::json RobotToJson(const RobotModel& robot) {
  nlohmann::json json;
  auto& links = json["links"] = nlohmann::json::array();
  for (const Link& link : robot.links) {
    links.push_back({{"parent", link.parent},
                     {"offset", VectorToJson(link.offset)},
                     {"axis", VectorToJson(link.axis)}});
  }
  auto& limits = json["joint_limits"] = nlohmann::json::array();
  for (const auto& limit : robot.joint_limits) {
    limits.push_back({limit.lower, limit.upper});
  }
  auto& muscles = json["muscles"] = nlohmann::json::array();
  for (const auto& muscle : robot.muscles) {
    nlohmann::json vias = nlohmann::json::array();
    for (const auto& via : muscle.via_points) {
      vias.push_back({{"link", via.link}, {"local", VectorToJson(via.local)}});
    }
    muscles.push_back({{"id", muscle.id}, {"via_points", vias}});
  }
  json["truth_groups"] = robot.truth_groups;
  auto& duals = json["dual_memberships"] = nlohmann::json::array();
  for (const auto& [id, groups] : robot.dual_memberships) {
    duals.push_back({{"muscle", id}, {"groups", {groups.first, groups.second}}});
  }
  auto& pairs = json["antagonist_pairs"] = nlohmann::json::array();
  for (const auto& [a, b] : robot.antagonist_pairs) pairs.push_back({a, b});
  return json;
}

RobotModel RobotFromJson(const nlohmann::json& json) {
  RobotModel robot;
  try {
    for (const auto& link : json.at("links")) {
      Link parsed;
      parsed.parent = link.at("parent").get<int>();
      parsed.offset = VectorFromJson(link.at("offset"));
      parsed.axis = VectorFromJson(link.at("axis"));
      if (parsed.parent >= 0) parsed.axis.normalize();
      robot.links.push_back(parsed);
    }
    for (const auto& limit : json.at("joint_limits")) {
      robot.joint_limits.push_back(
          {limit.at(0).get<double>(), limit.at(1).get<double>()});
    }
    for (const auto& muscle : json.at("muscles")) {
      MusclePath path;
      path.id = muscle.at("id").get<int>();
      for (const auto& via : muscle.at("via_points")) {
        path.via_points.push_back(
            {via.at("link").get<int>(), VectorFromJson(via.at("local"))});
      }
      robot.muscles.push_back(std::move(path));
    }
    robot.truth_groups =
        json.at("truth_groups").get<std::vector<std::vector<int>>>();
    if (json.contains("dual_memberships")) {
      for (const auto& dual : json.at("dual_memberships")) {
        robot.dual_memberships[dual.at("muscle").get<int>()] = {
            dual.at("groups").at(0).get<int>(),
            dual.at("groups").at(1).get<int>()};
      }
    }
    if (json.contains("antagonist_pairs")) {
      for (const auto& pair : json.at("antagonist_pairs")) {
        robot.antagonist_pairs.emplace_back(pair.at(0).get<int>(),
                                            pair.at(1).get<int>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed robot document: ") + e.what(), 0,
                     0);
  }
  robot.Validate();
  return robot;
}

nlohmann::json SynthSpecToJson(const SynthSpec& spec) {
  return {{"chains", spec.chains},
          {"joints_per_chain", spec.joints_per_chain},
          {"antagonist_pairs_per_joint", spec.antagonist_pairs_per_joint},
          {"polyarticular_count", spec.polyarticular_count},
          {"link_length", spec.link_length},
          {"seed", spec.seed}};
}

SynthSpec SynthSpecFromJson(const nlohmann::json& json, SynthSpec defaults) {
  SynthSpec spec = defaults;
  try {
    spec.chains = json.value("chains", spec.chains);
    spec.joints_per_chain = json.value("joints_per_chain", spec.joints_per_chain);
    spec.antagonist_pairs_per_joint =
        json.value("antagonist_pairs_per_joint", spec.antagonist_pairs_per_joint);
    spec.polyarticular_count =
        json.value("polyarticular_count", spec.polyarticular_count);
    spec.link_length = json.value("link_length", spec.link_length);
    spec.seed = json.value("seed", spec.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed synth spec: ") + e.what(), 0, 0);
  }
  return spec;
}

}  // namespace redungroup
