#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mag/graph.hpp"
#include "mag/rng.hpp"

namespace mag {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

enum class AugmentOp { kMaskFeatures, kRemoveEdges, kFlipEdges, kPpr, kHeat };

const char* AugmentOpName(AugmentOp op);

struct AugmentStep {
  AugmentOp op = AugmentOp::kMaskFeatures;
  double p = 0.0;          // mask probability / edge ratio
  double alpha = 0.15;     // PPR teleport probability
  double t = 5.0;          // heat-kernel diffusion time
  double keep_eps = 1e-4;  // diffusion sparsification threshold
  bool per_node = false;   // mask_features: independent mask per row

  bool stochastic() const { return op == AugmentOp::kMaskFeatures || op == AugmentOp::kRemoveEdges || op == AugmentOp::kFlipEdges; }
  bool structural() const { return op != AugmentOp::kMaskFeatures; }
  void Validate() const;

  static AugmentStep Mask(double p) { return {AugmentOp::kMaskFeatures, p}; }
  static AugmentStep Remove(double p) { return {AugmentOp::kRemoveEdges, p}; }
  static AugmentStep Flip(double p) { return {AugmentOp::kFlipEdges, p}; }
  static AugmentStep Ppr(double alpha, double keep_eps = 1e-4) {
    AugmentStep s{AugmentOp::kPpr};
    s.alpha = alpha;
    s.keep_eps = keep_eps;
    return s;
  }
  static AugmentStep Heat(double t, double keep_eps = 1e-4) {
    AugmentStep s{AugmentOp::kHeat};
    s.t = t;
    s.keep_eps = keep_eps;
    return s;
  }
};

struct AugmentationSpec {
  std::vector<AugmentStep> steps;
  std::uint64_t seed = 0;

  bool empty() const { return steps.empty(); }
  void Validate() const;
};

// Masked-feature + removed-edge augmentation at ratio 0.2.
AugmentationSpec DefaultAugmentation();

// X ⊙ m with one Bernoulli(1 - p) column mask shared by all rows
// (or one mask per row when per_node is set).
Matrix MaskFeatures(const Matrix& x, double p, Rng& rng, bool per_node = false);

// Deletes round(p * E) uniformly chosen undirected edges.
Graph RemoveEdges(const Graph& g, double p, Rng& rng);

// Symmetric perturbation location set: round(p * E) undirected pairs, half on
// existing edges and half on non-edges.
EdgeList SampleFlipLocations(const Graph& g, double p, Rng& rng);
// A ⊙ (1 - L) + (1 - A) ⊙ L for the given pairs.
Graph ApplyFlip(const Graph& g, const EdgeList& locations);
Graph FlipEdges(const Graph& g, double p, Rng& rng);

// Dense alpha (I - (1 - alpha) D^{-1/2} A D^{-1/2})^{-1}. Intended for
// inspection on small graphs; PprDiffuse streams columns instead.
Matrix PprMatrix(const Graph& g, double alpha);
// Dense e^{-t} exp(t A D^{-1}).
Matrix HeatMatrix(const Graph& g, double t);

// Diffused structure, thresholded at keep_eps, symmetrized and binarized.
Graph PprDiffuse(const Graph& g, double alpha, double keep_eps);
Graph HeatDiffuse(const Graph& g, double t, double keep_eps);

Graph ApplyStep(const Graph& g, const AugmentStep& step, Rng& rng);
Graph ComposeAugmentation(const Graph& g, const AugmentationSpec& spec, Rng& rng);
Graph ComposeAugmentation(const Graph& g, const AugmentationSpec& spec);

// Caches the deterministic prefix of a spec (diffusion steps before the
// first stochastic one) so repeated draws only redo the stochastic tail.
class Augmenter {
 public:
  Augmenter(const Graph& base, AugmentationSpec spec);

  bool stochastic() const;
  Graph Draw(Rng& rng) const;

 private:
  AugmentationSpec spec_;
  Graph prefix_;
  std::size_t tail_begin_ = 0;
};

}  // namespace mag
