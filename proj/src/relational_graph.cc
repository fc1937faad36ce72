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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "redungroup/errors.h"

namespace redungroup {

Eigen::MatrixXd RelationalGraph::FunctionalMatrix() const {
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(num_z, num_x);
  for (const Edge& e : functional_edges) matrix(e.u - num_x, e.v) = e.weight;
  return matrix;
}

Eigen::MatrixXd RelationalGraph::SpatialMatrix() const {
  Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(num_x, num_x);
  for (const Edge& e : spatial_edges) {
    matrix(e.u, e.v) = e.weight;
    matrix(e.v, e.u) = e.weight;
  }
  return matrix;
}

std::vector<Edge> BuildFunctionalEdges(const Eigen::MatrixXd& functional,
                                       const GraphBuildConfig& config) {
  if (!functional.allFinite()) {
    throw InvalidArgumentError("functional matrix has non-finite entries");
  }
  const int num_z = static_cast<int>(functional.rows());
  const int num_x = static_cast<int>(functional.cols());
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(num_z) * num_x);
  for (int i = 0; i < num_z; ++i) {
    for (int j = 0; j < num_x; ++j) {
      const double w = functional(i, j);
      edges.push_back({num_x + i, j, config.abs_functional ? std::abs(w) : w});
    }
  }
  return edges;
}

double ComputeBeta(const std::vector<Edge>& functional_edges,
                   const Eigen::MatrixXd& distances) {
  const Eigen::Index n = distances.rows();
  if (n != distances.cols() || n < 2) {
    throw InvalidArgumentError("distance matrix must be square with n >= 2");
  }
  const double off_diagonal_sum = distances.sum() - distances.trace();
  const double mean_distance =
      off_diagonal_sum / static_cast<double>(n * (n - 1));
  if (!(mean_distance > 0.0)) {
    throw InvalidArgumentError("mean spatial distance is zero");
  }
  if (functional_edges.empty()) return 0.0;
  double sum = 0.0;
  for (const Edge& e : functional_edges) sum += std::abs(e.weight);
  return sum / static_cast<double>(functional_edges.size()) / mean_distance;
}

std::vector<Edge> BuildSpatialEdges(const Eigen::MatrixXd& distances,
                                    double beta, const GraphBuildConfig& config,
                                    uint64_t seed) {
  if (config.noise_std < 0.0) {
    throw InvalidArgumentError("noise standard deviation must be >= 0");
  }
  const int n = static_cast<int>(distances.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, config.noise_std);
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = distances(i, j);
      if (config.noise_std > 0.0) d = std::max(0.0, d + noise(rng));
      // -0.0 would serialize with a sign; keep zero distances at +0.
      const double weight = d == 0.0 ? 0.0 : -beta * d;
      edges.push_back({i, j, weight});
    }
  }
  return edges;
}

RelationalGraph AssembleGraph(std::vector<Edge> functional_edges,
                              std::vector<Edge> spatial_edges, int num_x,
                              int num_z, bool signed_functional) {
  if (num_x < 1 || num_z < 0) {
    throw InvalidArgumentError("graph needs at least one x-vertex");
  }
  const int total = num_x + num_z;
  auto check_range = [total](const Edge& e) {
    if (e.u < 0 || e.u >= total || e.v < 0 || e.v >= total) {
      throw InvalidArgumentError("edge references an unknown vertex (" +
                                 std::to_string(e.u) + ", " +
                                 std::to_string(e.v) + ")");
    }
    if (!std::isfinite(e.weight)) {
      throw InvalidArgumentError("edge weight is not finite");
    }
  };

  std::set<std::pair<int, int>> seen;
  for (Edge& e : functional_edges) {
    check_range(e);
    const bool u_is_x = e.u < num_x;
    const bool v_is_x = e.v < num_x;
    if (u_is_x == v_is_x) {
      throw InvalidArgumentError(
          "functional edges must connect a z-vertex to an x-vertex");
    }
    if (u_is_x) std::swap(e.u, e.v);
    if (!signed_functional && e.weight < 0.0) {
      throw InvalidArgumentError("functional edge weight is negative");
    }
    if (!seen.insert({e.u, e.v}).second) {
      throw InvalidArgumentError("duplicate functional edge");
    }
  }

  seen.clear();
  for (Edge& e : spatial_edges) {
    check_range(e);
    if (e.u >= num_x || e.v >= num_x || e.u == e.v) {
      throw InvalidArgumentError(
          "spatial edges must connect two distinct x-vertices");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.weight > 0.0) {
      throw InvalidArgumentError("spatial edge weight is positive");
    }
    if (!seen.insert({e.u, e.v}).second) {
      throw InvalidArgumentError("duplicate spatial edge");
    }
  }
  const size_t pairs = static_cast<size_t>(num_x) * (num_x - 1) / 2;
  if (seen.size() != pairs) {
    throw InvalidArgumentError("spatial edges do not cover every x-vertex pair");
  }

  RelationalGraph graph;
  graph.num_x = num_x;
  graph.num_z = num_z;
  graph.functional_edges = std::move(functional_edges);
  graph.spatial_edges = std::move(spatial_edges);
  graph.x_ids.resize(num_x);
  for (int i = 0; i < num_x; ++i) graph.x_ids[i] = i;
  return graph;
}

RelationalGraph BuildRelationalGraph(const Eigen::MatrixXd& functional,
                                     const Eigen::MatrixXd& distances,
                                     const GraphBuildConfig& config) {
  if (distances.rows() != functional.cols()) {
    throw InvalidArgumentError(
        "distance matrix size does not match the channel count");
  }
  auto functional_edges = BuildFunctionalEdges(functional, config);
  const double beta = ComputeBeta(functional_edges, distances);
  auto spatial_edges = BuildSpatialEdges(distances, beta, config, config.seed);
  RelationalGraph graph = AssembleGraph(
      std::move(functional_edges), std::move(spatial_edges),
      static_cast<int>(functional.cols()), static_cast<int>(functional.rows()),
      !config.abs_functional);
  graph.beta = beta;
  return graph;
}

nlohmann::json GraphToJson(const RelationalGraph& graph) {
  nlohmann::json json;
  json["num_x"] = graph.num_x;
  json["num_z"] = graph.num_z;
  json["x_ids"] = graph.x_ids;
  json["beta"] = graph.beta;
  auto& functional = json["functional_edges"] = nlohmann::json::array();
  for (const Edge& e : graph.functional_edges) {
    functional.push_back({e.u, e.v, e.weight});
  }
  auto& spatial = json["spatial_edges"] = nlohmann::json::array();
  for (const Edge& e : graph.spatial_edges) spatial.push_back({e.u, e.v, e.weight});
  return json;
}

RelationalGraph GraphFromJson(const nlohmann::json& json) {
  try {
    auto read_edges = [](const nlohmann::json& list) {
      std::vector<Edge> edges;
      for (const auto& e : list) {
        edges.push_back(
            {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
      }
      return edges;
    };
    auto functional = read_edges(json.at("functional_edges"));
    const bool signed_functional =
        std::any_of(functional.begin(), functional.end(),
                    [](const Edge& e) { return e.weight < 0.0; });
    RelationalGraph graph = AssembleGraph(
        std::move(functional), read_edges(json.at("spatial_edges")),
        json.at("num_x").get<int>(), json.at("num_z").get<int>(),
        signed_functional);
    if (json.contains("x_ids")) {
      graph.x_ids = json.at("x_ids").get<std::vector<int>>();
      if (static_cast<int>(graph.x_ids.size()) != graph.num_x) {
        throw ParseError("x_ids length does not match num_x", 0, 0);
      }
    }
    graph.beta = json.value("beta", 0.0);
    return graph;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed graph document: ") + e.what(), 0,
                     0);
  }
}

std::string GraphToDot(const RelationalGraph& graph,
                       const std::optional<std::vector<int>>& labels) {
  if (labels && static_cast<int>(labels->size()) != graph.num_vertices()) {
    throw InvalidArgumentError("label count does not match vertex count");
  }
  std::ostringstream out;
  out.precision(6);
  out << "graph relational {\n";
  out << "  node [style=filled, colorscheme=set312];\n";
  for (int v = 0; v < graph.num_vertices(); ++v) {
    const bool x = graph.is_x(v);
    out << "  v" << v << " [label=\""
        << (x ? "x" + std::to_string(graph.x_ids[v])
              : "z" + std::to_string(v - graph.num_x))
        << "\", shape=" << (x ? "ellipse" : "box");
    if (labels) {
      out << ", fillcolor=" << ((*labels)[v] % 12) + 1 << ", group=\"g"
          << (*labels)[v] << "\"";
    } else {
      out << ", fillcolor=white";
    }
    out << "];\n";
  }
  for (const Edge& e : graph.functional_edges) {
    out << "  v" << e.u << " -- v" << e.v << " [w=" << e.weight
        << ", kind=functional];\n";
  }
  for (const Edge& e : graph.spatial_edges) {
    out << "  v" << e.u << " -- v" << e.v << " [w=" << e.weight
        << ", kind=spatial, style=dashed];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace redungroup
