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

#include "redungroup/relational_graph.h"

#include <gtest/gtest.h>

#include "redungroup/errors.h"
#include "redungroup/robot.h"

namespace redungroup {
namespace {

GraphBuildConfig Quiet() {
  GraphBuildConfig config;
  config.noise_std = 0.0;
  return config;
}

Eigen::MatrixXd UniformDistances(int n, double d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, d);
  m.diagonal().setZero();
  return m;
}

TEST(FunctionalEdges, SingleZeroEntry) {
  const auto edges = BuildFunctionalEdges(Eigen::MatrixXd::Zero(1, 1), Quiet());
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].weight, 0.0);
  EXPECT_EQ(edges[0].u, 1);  // the z-vertex follows the single x-vertex
  EXPECT_EQ(edges[0].v, 0);
}

TEST(FunctionalEdges, AbsoluteValues) {
  Eigen::MatrixXd w(1, 2);
  w << -0.3, 0.5;
  const auto abs_edges = BuildFunctionalEdges(w, Quiet());
  EXPECT_DOUBLE_EQ(abs_edges[0].weight, 0.3);
  EXPECT_DOUBLE_EQ(abs_edges[1].weight, 0.5);
  GraphBuildConfig raw = Quiet();
  raw.abs_functional = false;
  EXPECT_DOUBLE_EQ(BuildFunctionalEdges(w, raw)[0].weight, -0.3);
}

TEST(Beta, RatioOfMeans) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(2, 3, 0.2);
  w(0, 0) = -0.2;
  const auto edges = BuildFunctionalEdges(w, Quiet());
  EXPECT_DOUBLE_EQ(ComputeBeta(edges, UniformDistances(3, 0.5)), 0.4);
}

TEST(Beta, ZeroAndUnitCases) {
  const auto zero = BuildFunctionalEdges(Eigen::MatrixXd::Zero(2, 3), Quiet());
  EXPECT_EQ(ComputeBeta(zero, UniformDistances(3, 1.0)), 0.0);
  const auto ones = BuildFunctionalEdges(Eigen::MatrixXd::Ones(2, 3), Quiet());
  EXPECT_DOUBLE_EQ(ComputeBeta(ones, UniformDistances(3, 1.0)), 1.0);
  EXPECT_THROW(ComputeBeta(ones, Eigen::MatrixXd::Zero(3, 3)),
               InvalidArgumentError);
}

TEST(SpatialEdges, NoiselessWeight) {
  const auto edges = BuildSpatialEdges(UniformDistances(2, 0.5), 2.0, Quiet(), 0);
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_DOUBLE_EQ(edges[0].weight, -1.0);
}

TEST(SpatialEdges, CompleteAndNonPositiveUnderNoise) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const Eigen::MatrixXd d = SpatialDistanceMatrix(robot, SpreadPose(robot));
  GraphBuildConfig config;
  config.noise_std = 0.1;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto edges = BuildSpatialEdges(d, 0.3, config, seed);
    EXPECT_EQ(edges.size(), 28u * 27u / 2u);
    for (const Edge& e : edges) {
      EXPECT_LE(e.weight, 0.0);
      EXPECT_FALSE(std::signbit(e.weight) && e.weight == 0.0);
    }
  }
  EXPECT_THROW(BuildSpatialEdges(d, 0.3, GraphBuildConfig{-1.0}, 0),
               InvalidArgumentError);
}

TEST(SpatialEdges, SameSeedSameNoise) {
  const Eigen::MatrixXd d = UniformDistances(5, 1.0);
  GraphBuildConfig config;
  const auto a = BuildSpatialEdges(d, 1.0, config, 3);
  const auto b = BuildSpatialEdges(d, 1.0, config, 3);
  const auto c = BuildSpatialEdges(d, 1.0, config, 4);
  bool any_diff = false;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].weight, b[i].weight);
    any_diff = any_diff || a[i].weight != c[i].weight;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Assemble, DefaultRobotGraph) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const Eigen::MatrixXd d = SpatialDistanceMatrix(robot, SpreadPose(robot));
  const Eigen::MatrixXd w = Eigen::MatrixXd::Random(12, 28);
  const RelationalGraph graph = BuildRelationalGraph(w, d, GraphBuildConfig{});
  EXPECT_EQ(graph.num_x, 28);
  EXPECT_EQ(graph.num_z, 12);
  EXPECT_EQ(graph.functional_edges.size(), 12u * 28u);
  EXPECT_EQ(graph.spatial_edges.size(), 28u * 27u / 2u);
  EXPECT_TRUE(graph.FunctionalMatrix().isApprox(w.cwiseAbs()));
  const Eigen::MatrixXd s = graph.SpatialMatrix();
  EXPECT_EQ(s, s.transpose());
  EXPECT_GT(graph.beta, 0.0);
}

TEST(Assemble, RejectsMalformedEdges) {
  std::vector<Edge> functional = {{2, 0, 0.5}, {2, 1, 0.5}};
  std::vector<Edge> spatial = {{0, 1, -0.1}};
  EXPECT_NO_THROW(AssembleGraph(functional, spatial, 2, 1));

  auto bad = functional;
  bad.push_back({0, 1, 0.2});  // x to x
  EXPECT_THROW(AssembleGraph(bad, spatial, 2, 1), InvalidArgumentError);
  EXPECT_THROW(AssembleGraph(functional, {}, 2, 1), InvalidArgumentError);
  EXPECT_THROW(AssembleGraph(functional, {{0, 1, 0.1}}, 2, 1),
               InvalidArgumentError);
  EXPECT_THROW(AssembleGraph(functional, {{0, 1, -0.1}, {1, 0, -0.1}}, 2, 1),
               InvalidArgumentError);
  EXPECT_THROW(AssembleGraph({{2, 0, -0.5}}, spatial, 2, 1),
               InvalidArgumentError);
  EXPECT_NO_THROW(AssembleGraph({{2, 0, -0.5}}, spatial, 2, 1, true));
  EXPECT_THROW(AssembleGraph({{3, 0, 0.5}}, spatial, 2, 1),
               InvalidArgumentError);
}

TEST(Assemble, FlipsXZOrder) {
  const RelationalGraph graph =
      AssembleGraph({{0, 2, 0.5}}, {{1, 0, -0.2}}, 2, 1);
  EXPECT_EQ(graph.functional_edges[0].u, 2);
  EXPECT_EQ(graph.functional_edges[0].v, 0);
  EXPECT_EQ(graph.spatial_edges[0].u, 0);
}

TEST(Serialization, JsonRoundTripAndDot) {
  const RobotModel robot = BuildSyntheticRobot(SynthSpec{});
  const Eigen::MatrixXd d = SpatialDistanceMatrix(robot, SpreadPose(robot));
  const RelationalGraph graph =
      BuildRelationalGraph(Eigen::MatrixXd::Random(12, 28), d, GraphBuildConfig{});
  const RelationalGraph back = GraphFromJson(GraphToJson(graph));
  EXPECT_EQ(GraphToJson(back).dump(), GraphToJson(graph).dump());

  const std::string plain = GraphToDot(graph, std::nullopt);
  EXPECT_NE(plain.find("graph"), std::string::npos);
  EXPECT_NE(plain.find("style=dashed"), std::string::npos);
  std::vector<int> labels(graph.num_vertices(), 0);
  EXPECT_NE(GraphToDot(graph, labels).find("group="), std::string::npos);
  EXPECT_EQ(plain.find("group="), std::string::npos);
  labels.pop_back();
  EXPECT_THROW(GraphToDot(graph, labels), InvalidArgumentError);
}

}  // namespace
}  // namespace redungroup
