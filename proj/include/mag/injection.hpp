#pragma once

#include <cstdint>

#include "mag/graph.hpp"
#include "mag/rng.hpp"

namespace mag {

// Benchmark anomaly protocol: q cliques of size m_c (structural) plus an
// equal number of contextual anomalies.
struct InjectionSpec {
  int clique_size = 15;
  int num_cliques = 5;
  int contextual_count = 75;
  int candidate_pool = 50;
  std::uint64_t seed = 0;

  // Throws Error(kConfig) on an invalid spec for a graph of n nodes.
  void Validate(std::size_t num_nodes) const;
};

// Cora/Citeseer: 150 anomalies. Pubmed: 600.
InjectionSpec DefaultInjectionSpec(std::size_t num_nodes);

Graph InjectStructural(const Graph& g, int num_cliques, int clique_size, Rng& rng);
Graph InjectContextual(const Graph& g, int count, int candidate_pool, Rng& rng);

// Structural then contextual, on disjoint node pools. Rejects graphs that
// already carry anomaly labels.
Graph InjectBenchmark(const Graph& g, const InjectionSpec& spec);

}  // namespace mag
