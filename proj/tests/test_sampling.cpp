#include <queue>
#include <set>

#include <gtest/gtest.h>

#include "mag/error.hpp"
#include "mag/sampling.hpp"
#include "properties.hpp"
#include "test_util.hpp"

namespace mag {
namespace {

using testing::RandomGraph;

std::set<NodeId> Component(const Graph& g, NodeId start) {
  std::set<NodeId> seen{start};
  std::queue<NodeId> q;
  q.push(start);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (seen.insert(v).second) q.push(v);
    }
  }
  return seen;
}

TEST(RwrSample, IsolatedAndFullRestart) {
  std::vector<std::pair<NodeId, NodeId>> e = {{1, 2}};
  const Graph g(3, e, Matrix::Zero(3, 1));
  Rng rng(1);
  WalkOptions opts;
  EXPECT_EQ(RwrSample(g, 0, opts, rng), (std::vector<NodeId>{0, 0, 0, 0}));
  opts.restart_p = 1.0;
  EXPECT_EQ(RwrSample(g, 1, opts, rng), (std::vector<NodeId>{1, 1, 1, 1}));
}

TEST(RwrSample, PathEndpointSeesItsOnlyNeighbor) {
  std::vector<std::pair<NodeId, NodeId>> e = {{0, 1}, {1, 2}};
  const Graph g(3, e, Matrix::Zero(3, 1));
  WalkOptions opts;
  opts.subgraph_size = 2;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    ASSERT_EQ(RwrSample(g, 0, opts, rng), (std::vector<NodeId>{0, 1}));
  }
}

TEST(RwrSample, SmallComponentPadsWithTarget) {
  std::vector<std::pair<NodeId, NodeId>> e = {{0, 1}, {2, 3}, {3, 4}};
  const Graph g(5, e, Matrix::Zero(5, 1));
  Rng rng(2);
  EXPECT_EQ(RwrSample(g, 0, {}, rng), (std::vector<NodeId>{0, 1, 0, 0}));
}

TEST(RwrSample, NodesAreDistinctReachableAndTargetFirst) {
  Rng rng(3);
  const Graph g = RandomGraph(80, 0.03, 1, rng);
  for (NodeId t = 0; t < 80; ++t) {
    const auto comp = Component(g, t);
    for (int m : {1, 3, 4, 7}) {
      WalkOptions opts;
      opts.subgraph_size = m;
      const auto nodes = RwrSample(g, t, opts, rng);
      ASSERT_EQ(nodes.size(), static_cast<std::size_t>(m));
      EXPECT_EQ(nodes[0], t);
      std::set<NodeId> distinct;
      bool padding = false;
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        EXPECT_TRUE(comp.count(nodes[i])) << "node " << nodes[i] << " unreachable from " << t;
        if (nodes[i] == t) {
          padding = true;
        } else {
          EXPECT_FALSE(padding) << "a walk node follows padding";
          EXPECT_TRUE(distinct.insert(nodes[i]).second);
        }
      }
    }
  }
}

TEST(RwrSample, SeedDeterminismAndVariation) {
  Rng gen(4);
  const Graph g = RandomGraph(60, 0.15, 1, gen);
  std::set<std::vector<NodeId>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto x = RwrSample(g, 7, {}, a);
    EXPECT_EQ(x, RwrSample(g, 7, {}, b));
    seen.insert(x);
  }
  EXPECT_GT(seen.size(), 1u);
}

TEST(RwrSample, RejectsBadOptions) {
  const Graph g(2, {}, Matrix::Zero(2, 1));
  Rng rng(5);
  WalkOptions opts;
  opts.subgraph_size = 0;
  EXPECT_MAG_ERROR(RwrSample(g, 0, opts, rng), ErrorKind::kConfig);
  opts.subgraph_size = 4;
  opts.restart_p = 0.0;
  EXPECT_MAG_ERROR(RwrSample(g, 0, opts, rng), ErrorKind::kConfig);
  opts.restart_p = 0.5;
  EXPECT_MAG_ERROR(RwrSample(g, 2, opts, rng), ErrorKind::kBounds);
}

TEST(BuildInstance, MasksTargetAndKeepsItsFeature) {
  Rng gen(6);
  const Graph g = RandomGraph(50, 0.1, 6, gen);
  for (NodeId t = 0; t < 50; ++t) {
    Rng a(t), b(t);
    const Instance inst = BuildInstance(g, t, {}, a);
    const Instance again = BuildInstance(g, t, {}, b);
    EXPECT_EQ(inst.nodes, again.nodes);
    EXPECT_EQ(inst.features_masked, again.features_masked);
    ASSERT_EQ(inst.adjacency.rows(), 4);
    EXPECT_TRUE(inst.features_masked.row(0).isZero(0.0));
    EXPECT_EQ(inst.target_feature, g.features().row(t));
    EXPECT_EQ(inst.adjacency, InducedAdjacency(g, inst.nodes));
    for (int i = 1; i < 4; ++i) {
      if (inst.nodes[i] == t) {
        EXPECT_TRUE(inst.features_masked.row(i).isZero(0.0));
      } else {
        EXPECT_EQ(inst.features_masked.row(i), g.features().row(inst.nodes[i]));
      }
    }
  }
}

}  // namespace
}  // namespace mag
