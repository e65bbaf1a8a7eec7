#include "mag/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "mag/error.hpp"

namespace mag {

std::vector<NodeId> RwrSample(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng) {
  const int m = opts.subgraph_size;
  if (m < 1) throw Error(ErrorKind::kConfig, "subgraph_size must be >= 1");
  if (!(opts.restart_p > 0.0 && opts.restart_p <= 1.0)) {
    throw Error(ErrorKind::kConfig, "restart_p must lie in (0, 1]");
  }
  if (target < 0 || static_cast<std::size_t>(target) >= g.num_nodes()) {
    throw Error(ErrorKind::kBounds, "walk target out of range");
  }
  std::vector<NodeId> visited{target};
  visited.reserve(m);
  const long long budget = opts.max_steps > 0
                               ? opts.max_steps
                               : static_cast<long long>(std::ceil(10.0 * m / opts.restart_p));
  // Isolated targets and restart_p == 1 cannot leave the start node.
  if (g.degree(target) > 0 && opts.restart_p < 1.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    NodeId current = target;
    for (long long step = 0; step < budget && static_cast<int>(visited.size()) < m; ++step) {
      if (coin(rng) < opts.restart_p) {
        current = target;
        continue;
      }
      auto nb = g.neighbors(current);
      std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
      current = nb[pick(rng)];
      if (std::find(visited.begin(), visited.end(), current) == visited.end()) {
        visited.push_back(current);
      }
    }
  }
  visited.resize(m, target);
  return visited;
}

SampledSubgraph SampleSubgraph(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng) {
  SampledSubgraph s;
  s.target = target;
  s.nodes = RwrSample(g, target, opts, rng);
  s.adjacency = InducedAdjacency(g, s.nodes);
  return s;
}

Instance Materialize(const Graph& g, const SampledSubgraph& s) {
  Instance inst;
  inst.target = s.target;
  inst.nodes = s.nodes;
  inst.adjacency = s.adjacency;
  const auto m = static_cast<Eigen::Index>(s.nodes.size());
  inst.features_masked.resize(m, g.features().cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    // Padding repeats the target, so padded rows are masked as well.
    if (s.nodes[i] == s.target) {
      inst.features_masked.row(i).setZero();
    } else {
      inst.features_masked.row(i) = g.features().row(s.nodes[i]);
    }
  }
  inst.target_feature = g.features().row(s.target);
  return inst;
}

Instance BuildInstance(const Graph& g, NodeId target, const WalkOptions& opts, Rng& rng) {
  return Materialize(g, SampleSubgraph(g, target, opts, rng));
}

}  // namespace mag
