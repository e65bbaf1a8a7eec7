#include "mag/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "mag/error.hpp"
#include "mag/rng.hpp"

namespace mag {

void SyntheticSpec::Validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::kConfig, "synthetic graph: " + msg); };
  if (num_nodes < 2) bad("num_nodes must be >= 2");
  if (num_communities < 1 || num_communities > num_nodes) bad("num_communities must lie in [1, num_nodes]");
  if (!(avg_degree > 0.0) || avg_degree >= num_nodes - 1) bad("avg_degree must lie in (0, n-1)");
  if (!(homophily >= 0.0 && homophily <= 1.0)) bad("homophily must lie in [0, 1]");
  if (feature_dim < 1) bad("feature_dim must be >= 1");
  if (prototype_words < 1 || prototype_words > feature_dim) bad("prototype_words must lie in [1, feature_dim]");
  if (words_per_node < 1 || words_per_node > feature_dim) bad("words_per_node must lie in [1, feature_dim]");
  if (!(on_topic >= 0.0 && on_topic <= 1.0)) bad("on_topic must lie in [0, 1]");
}

Graph MakeSyntheticGraph(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng = MakeRng(spec.seed, {0x5e});
  const int n = spec.num_nodes;
  std::vector<int> community(n);
  for (int i = 0; i < n; ++i) community[i] = i % spec.num_communities;
  std::shuffle(community.begin(), community.end(), rng);
  std::vector<std::vector<NodeId>> members(spec.num_communities);
  for (int i = 0; i < n; ++i) members[community[i]].push_back(i);

  std::vector<std::pair<NodeId, NodeId>> edges;
  const auto target_edges = static_cast<std::size_t>(spec.avg_degree * n / 2.0);
  std::uniform_int_distribution<int> any(0, n - 1);
  std::bernoulli_distribution inside(spec.homophily);
  // A spanning chain per community keeps every node at degree >= 1.
  for (const auto& m : members) {
    for (std::size_t k = 1; k < m.size(); ++k) edges.emplace_back(m[k - 1], m[k]);
  }
  for (int c = 1; c < spec.num_communities; ++c) edges.emplace_back(members[c - 1].front(), members[c].front());
  while (edges.size() < target_edges) {
    const NodeId u = any(rng);
    NodeId v;
    if (inside(rng)) {
      const auto& m = members[community[u]];
      v = m[std::uniform_int_distribution<std::size_t>(0, m.size() - 1)(rng)];
    } else {
      v = any(rng);
    }
    if (u != v) edges.emplace_back(u, v);
  }

  std::vector<std::vector<int>> prototypes(spec.num_communities);
  std::vector<int> words(spec.feature_dim);
  std::iota(words.begin(), words.end(), 0);
  for (auto& p : prototypes) {
    std::shuffle(words.begin(), words.end(), rng);
    p.assign(words.begin(), words.begin() + spec.prototype_words);
  }
  Matrix x = Matrix::Zero(n, spec.feature_dim);
  std::bernoulli_distribution topical(spec.on_topic);
  std::uniform_int_distribution<int> word(0, spec.feature_dim - 1);
  std::uniform_int_distribution<int> proto_word(0, spec.prototype_words - 1);
  for (int i = 0; i < n; ++i) {
    int placed = 0;
    while (placed < spec.words_per_node) {
      const int w = topical(rng) ? prototypes[community[i]][proto_word(rng)] : word(rng);
      if (x(i, w) == 0.0) {
        x(i, w) = 1.0;
        ++placed;
      }
    }
  }
  return Graph(static_cast<std::size_t>(n), edges, std::move(x));
}

}  // namespace mag
