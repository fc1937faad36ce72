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

#include <gtest/gtest.h>

#include "redungroup/errors.h"
#include "redungroup/grouping.h"
#include "test_support.h"

namespace redungroup {
namespace {

TEST(KruskalMerge, RecoversPlantedBlocks) {
  const GroupingResult result =
      BaselineKruskalMerge(testing::PlantedTwoBlockGraph(), 2);
  EXPECT_TRUE(testing::SameTwoPartition(result.labels, testing::PlantedBlocks()));
  EXPECT_DOUBLE_EQ(result.MaxGroupFraction(), 0.5);
}

TEST(KruskalMerge, OneGroupPerVertex) {
  const RelationalGraph graph = testing::PlantedTwoBlockGraph();
  const GroupingResult result =
      BaselineKruskalMerge(graph, graph.num_vertices());
  for (int v = 0; v < graph.num_vertices(); ++v) EXPECT_EQ(result.labels[v], v);
}

TEST(KruskalMerge, SingleGroupHoldsEverything) {
  const GroupingResult result =
      BaselineKruskalMerge(testing::PlantedTwoBlockGraph(), 1);
  EXPECT_DOUBLE_EQ(result.MaxGroupFraction(), 1.0);
}

// A chain of strong ties pulls every x-vertex into one component.
TEST(KruskalMerge, ChainingProducesGiantGroup) {
  const int num_x = 6;
  std::vector<Edge> functional;
  for (int x = 0; x < num_x; ++x) functional.push_back({num_x, x, 0.0});
  std::vector<Edge> spatial;
  for (int a = 0; a < num_x; ++a) {
    for (int b = a + 1; b < num_x; ++b) {
      spatial.push_back({a, b, b == a + 1 ? -0.01 * (a + 1) : -1.0});
    }
  }
  const RelationalGraph graph = AssembleGraph(functional, spatial, num_x, 1);
  const GroupingResult result = BaselineKruskalMerge(graph, 2);
  // The zero-weight star around the z-vertex merges first and absorbs all
  // but the last x-vertex before the target count is reached.
  EXPECT_DOUBLE_EQ(result.MaxGroupFraction(), 5.0 / 6.0);
  EXPECT_EQ(result.labels[5], 1);
}

TEST(KruskalMerge, RejectsBadGroupCounts) {
  const RelationalGraph graph = testing::PlantedTwoBlockGraph();
  EXPECT_THROW(BaselineKruskalMerge(graph, 0), InvalidArgumentError);
  EXPECT_THROW(BaselineKruskalMerge(graph, graph.num_vertices() + 1),
               InvalidArgumentError);
}

}  // namespace
}  // namespace redungroup
