#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mag/nn.hpp"
#include "mag/sampling.hpp"

namespace mag {

enum class GraphSlot { kOriginal = 0, kAugmented = 1 };
enum class ViewKind { kSubgraph = 1, kMaskedNode = 2, kNode = 3 };
enum class ContrastScale { kNodeSubgraph, kNodeNode, kSubgraphSubgraph, kMaskedNodeSubgraph };

const char* ViewKindName(ViewKind kind);
const char* ContrastScaleName(ContrastScale scale);

struct ViewDecomposition {
  GraphSlot graph = GraphSlot::kOriginal;
  int gnn = 1;  // 1 or 2
  ViewKind kind = ViewKind::kSubgraph;

  auto operator<=>(const ViewDecomposition&) const = default;
};

// Pool index 1..12. Blocks of three in the order (original, GNN-1),
// (original, GNN-2), (augmented, GNN-1), (augmented, GNN-2); within a block
// subgraph / masked node / node.
class ViewId {
 public:
  explicit ViewId(int id);

  static ViewId Encode(const ViewDecomposition& v);
  ViewDecomposition Decode() const;

  int value() const { return id_; }
  GraphSlot graph() const { return Decode().graph; }
  int gnn() const { return Decode().gnn; }
  ViewKind kind() const { return Decode().kind; }

  auto operator<=>(const ViewId&) const = default;

 private:
  int id_;
};

ViewDecomposition DecodeView(int id);
int EncodeView(const ViewDecomposition& v);

// Scale of a pair, from its two kinds. Pairs of two node-level views (node
// or masked node) are node-node.
ContrastScale ClassifyPair(ViewId a, ViewId b);

// Unordered pair stored smaller id first.
struct ContrastPair {
  ContrastPair(int a, int b);
  ContrastPair(ViewId a, ViewId b);

  ViewId first;
  ViewId second;

  ContrastScale scale() const { return ClassifyPair(first, second); }
  std::string ToString() const;  // "[1,3]"
  bool operator==(const ContrastPair&) const = default;
};

struct CombinationConfig {
  std::vector<ContrastPair> pairs;
  std::vector<double> weights;

  void Validate() const;
  bool UsesAugmented() const;
  std::vector<ViewId> NeededViews() const;
  std::string ToString() const;  // "[1,3]+[4,6]"
};

// Embedding table: one N x h matrix per view, rows in batch order.
using ViewTable = std::map<ViewId, Matrix>;

// Reference (per-instance) view computation through GcnForward, NodeEmbed and
// ReadoutMean. `augmented` must be non-empty iff a needed view lives on the
// augmented graph.
ViewTable ComputeViews(std::span<const Instance> original, std::span<const Instance> augmented,
                       const ModelParams& params, std::span<const ViewId> needed);

struct PairLossResult {
  double loss = 0.0;
  std::vector<double> y_pos;
  std::vector<double> y_neg;
};

// Cyclic within-batch negatives: perm[i] = (i + 1) mod n.
std::vector<int> CyclicShift(std::size_t n);
void CheckDerangement(std::span<const int> perm);

// Positive: Bilinear(view_a(i), view_b(i)); negative: Bilinear(view_a(perm[i]), view_b(i)),
// view_a being the smaller id.
PairLossResult PairLoss(const ContrastPair& pair, const ViewTable& views, std::span<const int> perm,
                        const DiscriminatorParams& disc);

double CombineLosses(std::span<const double> losses, std::span<const double> weights);

}  // namespace mag
