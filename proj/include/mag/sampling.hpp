#pragma once

#include <vector>

#include "mag/graph.hpp"
#include "mag/rng.hpp"

namespace mag {

struct WalkOptions {
  int subgraph_size = 4;
  double restart_p = 0.5;
  // Step budget; 0 means 10 * m / restart_p.
  long long max_steps = 0;
};

// Random walk with restart from `target`. Distinct visited nodes in
// first-visit order, padded with `target` up to subgraph_size. Position 0 is
// always the target.
std::vector<NodeId> RwrSample(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng);

// Node list plus normalized local adjacency; the feature block is implied
// (rows of X, target row zeroed).
struct SampledSubgraph {
  NodeId target = 0;
  std::vector<NodeId> nodes;
  Matrix adjacency;
};

SampledSubgraph SampleSubgraph(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng);

// Fully materialized instance.
struct Instance {
  NodeId target = 0;
  std::vector<NodeId> nodes;
  Matrix adjacency;        // m x m normalized
  Matrix features_masked;  // m x d; rows holding the target are zero
  RowVector target_feature;
};

Instance BuildInstance(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng);
Instance Materialize(const Graph& g, const SampledSubgraph& s);

}  // namespace mag
