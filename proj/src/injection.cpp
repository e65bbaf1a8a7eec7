#include "mag/injection.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "mag/error.hpp"

namespace mag {

void InjectionSpec::Validate(std::size_t num_nodes) const {
  if (clique_size < 1 || num_cliques < 0 || contextual_count < 0) {
    throw Error(ErrorKind::kConfig, "injection counts must be non-negative and clique_size >= 1");
  }
  if (candidate_pool < 1) throw Error(ErrorKind::kConfig, "candidate_pool must be >= 1");
  if (static_cast<long long>(num_cliques) * clique_size != contextual_count) {
    throw Error(ErrorKind::kConfig,
                "num_cliques * clique_size must equal contextual_count (half-and-half split)");
  }
  if (2ULL * contextual_count > num_nodes) {
    throw Error(ErrorKind::kCapacity, "injection needs more anomalies than the graph has nodes");
  }
}

InjectionSpec DefaultInjectionSpec(std::size_t num_nodes) {
  InjectionSpec spec;
  if (num_nodes >= 10000) {
    spec.num_cliques = 20;
    spec.contextual_count = 300;
  }
  return spec;
}

namespace {

std::vector<NodeId> UnlabeledNodes(const Graph& g) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < static_cast<NodeId>(g.num_nodes()); ++v) {
    if (g.label(v) == AnomalyKind::kNormal) out.push_back(v);
  }
  return out;
}

// Uniform sample of k items without replacement (partial Fisher-Yates).
std::vector<NodeId> SampleWithoutReplacement(std::vector<NodeId> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

std::vector<AnomalyKind> LabelsOrNormal(const Graph& g) {
  if (g.has_labels()) return g.labels();
  return std::vector<AnomalyKind>(g.num_nodes(), AnomalyKind::kNormal);
}

}  // namespace

Graph InjectStructural(const Graph& g, int num_cliques, int clique_size, Rng& rng) {
  if (num_cliques < 0 || clique_size < 1) throw Error(ErrorKind::kConfig, "invalid clique parameters");
  auto pool = UnlabeledNodes(g);
  const auto need = static_cast<std::size_t>(num_cliques) * static_cast<std::size_t>(clique_size);
  if (pool.size() < need) {
    throw Error(ErrorKind::kCapacity, "structural injection needs " + std::to_string(need) +
                                          " unlabeled nodes, have " + std::to_string(pool.size()));
  }
  auto chosen = SampleWithoutReplacement(std::move(pool), need, rng);
  auto edges = g.EdgeList();
  auto labels = LabelsOrNormal(g);
  for (int c = 0; c < num_cliques; ++c) {
    const auto begin = static_cast<std::size_t>(c) * clique_size;
    for (int a = 0; a < clique_size; ++a) {
      const NodeId u = chosen[begin + a];
      labels[u] = AnomalyKind::kStructural;
      for (int b = a + 1; b < clique_size; ++b) {
        const NodeId v = chosen[begin + b];
        if (!g.has_edge(u, v)) edges.emplace_back(std::min(u, v), std::max(u, v));
      }
    }
  }
  return Graph(g.num_nodes(), edges, g.features(), std::move(labels));
}

Graph InjectContextual(const Graph& g, int count, int candidate_pool, Rng& rng) {
  if (count < 0) throw Error(ErrorKind::kConfig, "contextual count must be non-negative");
  if (candidate_pool < 1) throw Error(ErrorKind::kConfig, "candidate_pool must be >= 1");
  auto pool = UnlabeledNodes(g);
  if (pool.size() < static_cast<std::size_t>(count)) {
    throw Error(ErrorKind::kCapacity, "contextual injection needs " + std::to_string(count) +
                                          " unlabeled nodes, have " + std::to_string(pool.size()));
  }
  auto chosen = SampleWithoutReplacement(std::move(pool), static_cast<std::size_t>(count), rng);
  const Matrix& x = g.features();
  Matrix features = x;
  auto labels = LabelsOrNormal(g);
  std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(g.num_nodes()) - 1);
  for (NodeId v : chosen) {
    NodeId best = -1;
    double best_dist = -1.0;
    for (int k = 0; k < candidate_pool; ++k) {
      const NodeId c = any_node(rng);
      const double dist = (x.row(c) - x.row(v)).squaredNorm();
      if (dist > best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    // Candidates are read from the pre-injection matrix.
    features.row(v) = x.row(best);
    labels[v] = AnomalyKind::kContextual;
  }
  return g.WithFeatures(std::move(features)).WithLabels(std::move(labels));
}

Graph InjectBenchmark(const Graph& g, const InjectionSpec& spec) {
  if (g.num_anomalies() > 0) {
    throw Error(ErrorKind::kValidation, "graph already carries anomaly labels; inject into a clean graph");
  }
  spec.Validate(g.num_nodes());
  Rng rng = MakeRng(spec.seed, {stream::kInject});
  Graph out = InjectStructural(g, spec.num_cliques, spec.clique_size, rng);
  return InjectContextual(out, spec.contextual_count, spec.candidate_pool, rng);
}

}  // namespace mag
