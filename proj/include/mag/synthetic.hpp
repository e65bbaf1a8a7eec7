#pragma once

#include <cstdint>

#include "mag/graph.hpp"

namespace mag {

// Planted-partition citation-like graph: homophilous edges between
// communities and sparse binary bag-of-words features drawn around one
// prototype word set per community. No anomaly labels.
struct SyntheticSpec {
  int num_nodes = 600;
  int num_communities = 6;
  double avg_degree = 4.0;
  double homophily = 0.9;  // probability an edge stays inside the community
  int feature_dim = 200;
  int prototype_words = 30;
  int words_per_node = 12;
  double on_topic = 0.85;  // probability a word is drawn from the prototype
  std::uint64_t seed = 0;

  void Validate() const;
};

Graph MakeSyntheticGraph(const SyntheticSpec& spec);

}  // namespace mag
