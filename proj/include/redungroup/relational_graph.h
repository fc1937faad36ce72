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

#ifndef REDUNGROUP_RELATIONAL_GRAPH_H_
#define REDUNGROUP_RELATIONAL_GRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace redungroup {

// Vertex numbering shared by the graph and the grouping code: x-vertices
// (observed channels) are 0..num_x-1, z-vertices (latent units) follow as
// num_x..num_x+num_z-1.
struct Edge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// Weighted undirected graph with bipartite z-x functional edges and complete
// x-x spatial edges.
struct RelationalGraph {
  int num_x = 0;
  int num_z = 0;
  std::vector<Edge> functional_edges;  // u is the z-vertex, v the x-vertex
  std::vector<Edge> spatial_edges;     // u < v, both x-vertices
  std::vector<int> x_ids;              // muscle id of each x-vertex
  double beta = 0.0;                   // spatial scale used, for reference

  int num_vertices() const { return num_x + num_z; }
  bool is_x(int vertex) const { return vertex < num_x; }
  int z_vertex(int latent) const { return num_x + latent; }

  // Dense views: functional weights as num_z x num_x, spatial weights as a
  // symmetric num_x x num_x matrix with zero diagonal.
  Eigen::MatrixXd FunctionalMatrix() const;
  Eigen::MatrixXd SpatialMatrix() const;
};

struct GraphBuildConfig {
  double noise_std = 0.1;  // meters
  bool abs_functional = true;
  bool fold_batchnorm = false;
  uint64_t seed = 0;
};

// One edge per (latent i, channel j) carrying |W(i, j)|, or W(i, j) when
// abs_functional is false.
std::vector<Edge> BuildFunctionalEdges(const Eigen::MatrixXd& functional,
                                       const GraphBuildConfig& config);

// Ratio of the mean functional weight magnitude to the mean off-diagonal
// distance. Throws InvalidArgumentError when the mean distance is zero.
double ComputeBeta(const std::vector<Edge>& functional_edges,
                   const Eigen::MatrixXd& distances);

// Complete x-x edges with weight -beta * max(0, d + noise); one Gaussian draw
// per unordered pair in row-major order of (i < j).
std::vector<Edge> BuildSpatialEdges(const Eigen::MatrixXd& distances,
                                    double beta, const GraphBuildConfig& config,
                                    uint64_t seed);

// Validates bipartiteness, spatial completeness, weight signs, and rejects
// duplicate or dangling edges. Functional edges given as (x, z) are flipped
// to (z, x). Negative functional weights are accepted only when
// `signed_functional` is set.
RelationalGraph AssembleGraph(std::vector<Edge> functional_edges,
                              std::vector<Edge> spatial_edges, int num_x,
                              int num_z, bool signed_functional = false);

// Convenience: all of the above from a functional matrix and distances.
RelationalGraph BuildRelationalGraph(const Eigen::MatrixXd& functional,
                                     const Eigen::MatrixXd& distances,
                                     const GraphBuildConfig& config);

nlohmann::json GraphToJson(const RelationalGraph& graph);
RelationalGraph GraphFromJson(const nlohmann::json& json);

// Graphviz rendering. When `labels` is given, vertices are filled by group.
std::string GraphToDot(const RelationalGraph& graph,
                       const std::optional<std::vector<int>>& labels);

}  // namespace redungroup

#endif  // REDUNGROUP_RELATIONAL_GRAPH_H_
