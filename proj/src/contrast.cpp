#include "mag/contrast.hpp"

#include <algorithm>
#include <set>

#include "mag/error.hpp"

namespace mag {

const char* ViewKindName(ViewKind kind) {
  switch (kind) {
    case ViewKind::kSubgraph: return "subgraph";
    case ViewKind::kMaskedNode: return "masked_node";
    case ViewKind::kNode: return "node";
  }
  return "?";
}

const char* ContrastScaleName(ContrastScale scale) {
  switch (scale) {
    case ContrastScale::kNodeSubgraph: return "node-subgraph";
    case ContrastScale::kNodeNode: return "node-node";
    case ContrastScale::kSubgraphSubgraph: return "subgraph-subgraph";
    case ContrastScale::kMaskedNodeSubgraph: return "masked-node-subgraph";
  }
  return "?";
}

ViewDecomposition DecodeView(int id) {
  if (id < 1 || id > 12) throw Error(ErrorKind::kConfig, "view id " + std::to_string(id) + " outside 1..12");
  const int block = (id - 1) / 3;
  const int offset = (id - 1) % 3 + 1;
  return {block >= 2 ? GraphSlot::kAugmented : GraphSlot::kOriginal, block % 2 + 1, static_cast<ViewKind>(offset)};
}

int EncodeView(const ViewDecomposition& v) {
  if (v.gnn != 1 && v.gnn != 2) throw Error(ErrorKind::kConfig, "gnn slot must be 1 or 2");
  const int block = 2 * static_cast<int>(v.graph) + (v.gnn - 1);
  return 3 * block + static_cast<int>(v.kind);
}

ViewId::ViewId(int id) : id_(id) { DecodeView(id); }

ViewId ViewId::Encode(const ViewDecomposition& v) { return ViewId(EncodeView(v)); }

ViewDecomposition ViewId::Decode() const { return DecodeView(id_); }

ContrastScale ClassifyPair(ViewId a, ViewId b) {
  const ViewKind ka = a.kind(), kb = b.kind();
  const bool sa = ka == ViewKind::kSubgraph, sb = kb == ViewKind::kSubgraph;
  if (sa && sb) return ContrastScale::kSubgraphSubgraph;
  if (!sa && !sb) return ContrastScale::kNodeNode;
  const ViewKind other = sa ? kb : ka;
  return other == ViewKind::kNode ? ContrastScale::kNodeSubgraph : ContrastScale::kMaskedNodeSubgraph;
}

ContrastPair::ContrastPair(int a, int b) : ContrastPair(ViewId(a), ViewId(b)) {}

ContrastPair::ContrastPair(ViewId a, ViewId b) : first(std::min(a, b)), second(std::max(a, b)) {
  if (a == b) throw Error(ErrorKind::kConfig, "a contrast pair needs two distinct views");
}

std::string ContrastPair::ToString() const {
  return "[" + std::to_string(first.value()) + "," + std::to_string(second.value()) + "]";
}

void CombinationConfig::Validate() const {
  if (pairs.empty()) throw Error(ErrorKind::kConfig, "combination has no pairs");
  if (weights.size() != pairs.size()) {
    throw Error(ErrorKind::kConfig, "combination has " + std::to_string(pairs.size()) + " pairs but " +
                                        std::to_string(weights.size()) + " weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::kConfig, "pair weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::kConfig, "pair weights must not all be zero");
}

bool CombinationConfig::UsesAugmented() const {
  return std::any_of(pairs.begin(), pairs.end(), [](const ContrastPair& p) {
    return p.first.graph() == GraphSlot::kAugmented || p.second.graph() == GraphSlot::kAugmented;
  });
}

std::vector<ViewId> CombinationConfig::NeededViews() const {
  std::set<ViewId> s;
  for (const auto& p : pairs) {
    s.insert(p.first);
    s.insert(p.second);
  }
  return {s.begin(), s.end()};
}

std::string CombinationConfig::ToString() const {
  std::string out;
  for (const auto& p : pairs) {
    if (!out.empty()) out += "+";
    out += p.ToString();
  }
  return out;
}

ViewTable ComputeViews(std::span<const Instance> original, std::span<const Instance> augmented,
                       const ModelParams& params, std::span<const ViewId> needed) {
  const bool wants_aug = std::any_of(needed.begin(), needed.end(),
                                     [](ViewId v) { return v.graph() == GraphSlot::kAugmented; });
  if (wants_aug && augmented.empty()) {
    throw Error(ErrorKind::kConfig, "augmented views requested without augmented instances");
  }
  if (!augmented.empty() && augmented.size() != original.size()) {
    throw Error(ErrorKind::kDimension, "original and augmented batches differ in size");
  }
  ViewTable table;
  const auto n = static_cast<Eigen::Index>(original.size());
  const Eigen::Index h = params.hidden_dim();
  for (ViewId view : needed) {
    const auto dec = view.Decode();
    auto instances = dec.graph == GraphSlot::kOriginal ? original : augmented;
    const BackboneParams& w = params.backbones[dec.gnn - 1];
    Matrix out(n, h);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Instance& inst = instances[i];
      if (dec.kind == ViewKind::kNode) {
        out.row(i) = NodeEmbed(inst.target_feature, w);
        continue;
      }
      const Matrix z = GcnForward(inst.adjacency, inst.features_masked, w);
      out.row(i) = dec.kind == ViewKind::kSubgraph ? ReadoutMean(z) : RowVector(z.row(0));
    }
    table.emplace(view, std::move(out));
  }
  return table;
}

std::vector<int> CyclicShift(std::size_t n) {
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>((i + 1) % n);
  return perm;
}

void CheckDerangement(std::span<const int> perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] < 0 || static_cast<std::size_t>(perm[i]) >= perm.size()) {
      throw Error(ErrorKind::kSampling, "negative permutation index out of range");
    }
    if (static_cast<std::size_t>(perm[i]) == i) {
      throw Error(ErrorKind::kSampling, "negative permutation has a fixed point at " + std::to_string(i));
    }
  }
}

PairLossResult PairLoss(const ContrastPair& pair, const ViewTable& views, std::span<const int> perm,
                        const DiscriminatorParams& disc) {
  CheckDerangement(perm);
  auto a_it = views.find(pair.first);
  auto b_it = views.find(pair.second);
  if (a_it == views.end() || b_it == views.end()) {
    throw Error(ErrorKind::kConfig, "views for pair " + pair.ToString() + " were not computed");
  }
  const Matrix& a = a_it->second;
  const Matrix& b = b_it->second;
  if (static_cast<std::size_t>(a.rows()) != perm.size()) {
    throw Error(ErrorKind::kDimension, "negative permutation length differs from batch size");
  }
  PairLossResult r;
  r.y_pos.resize(perm.size());
  r.y_neg.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    r.y_pos[i] = BilinearScore(a.row(row), b.row(row), disc);
    r.y_neg[i] = BilinearScore(a.row(perm[i]), b.row(row), disc);
  }
  r.loss = ContrastBce(r.y_pos, r.y_neg);
  return r;
}

double CombineLosses(std::span<const double> losses, std::span<const double> weights) {
  if (losses.size() != weights.size()) throw Error(ErrorKind::kDimension, "loss/weight length mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < losses.size(); ++k) total += weights[k] * losses[k];
  return total;
}

}  // namespace mag
