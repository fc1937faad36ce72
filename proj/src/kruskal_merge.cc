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

#include <algorithm>
#include <numeric>
#include <vector>

#include "redungroup/errors.h"
#include "redungroup/grouping.h"

namespace redungroup {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int size) : parent_(size), rank_(size, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int Find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  bool Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

}  // namespace

GroupingResult BaselineKruskalMerge(const RelationalGraph& graph,
                                    int num_groups) {
  const int vertices = graph.num_vertices();
  if (num_groups < 1 || num_groups > vertices) {
    throw InvalidArgumentError("group count must lie in [1, vertex count]");
  }
  std::vector<Edge> edges = graph.functional_edges;
  edges.insert(edges.end(), graph.spatial_edges.begin(),
               graph.spatial_edges.end());
  // Strongest ties first; stable on the original order for equal weights.
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.weight > b.weight; });

  DisjointSets sets(vertices);
  int components = vertices;
  for (const Edge& e : edges) {
    if (components == num_groups) break;
    if (sets.Union(e.u, e.v)) --components;
  }
  if (components != num_groups) {
    throw InvalidArgumentError(
        "graph is disconnected: merging stops at " +
        std::to_string(components) + " components, cannot reach " +
        std::to_string(num_groups));
  }

  // Number components by their smallest vertex.
  std::vector<int> component_label(vertices, -1);
  std::vector<int> labels(vertices);
  int next = 0;
  for (int v = 0; v < vertices; ++v) {
    const int root = sets.Find(v);
    if (component_label[root] < 0) component_label[root] = next++;
    labels[v] = component_label[root];
  }

  GroupingConfig config;
  config.num_groups = num_groups;
  return SummarizeLabels(GroupingProblem(graph), labels, config, TraceSummary{});
}

}  // namespace redungroup
