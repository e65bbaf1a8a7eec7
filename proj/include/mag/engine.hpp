#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mag/contrast.hpp"
#include "mag/nn.hpp"
#include "mag/sampling.hpp"

namespace mag {

// Sampled subgraphs for one batch of targets. `augmented` is empty unless the
// combination uses augmented views; otherwise it is aligned with `original`.
struct BatchSamples {
  std::vector<SampledSubgraph> original;
  std::vector<SampledSubgraph> augmented;

  std::size_t size() const { return original.size(); }
};

struct PairOutput {
  double loss = 0.0;
  std::vector<double> y_pos;
  std::vector<double> y_neg;
};

// Cached forward pass over a batch: views for every needed pool id, pair
// scores, and the per-layer intermediates needed for exact gradients.
// Holds pointers to its inputs, which must outlive it.
class ForwardTrace {
 public:
  ForwardTrace(const ModelParams& params, const CombinationConfig& combination, const Graph& original,
               const Graph* augmented, const BatchSamples& batch, std::span<const int> negatives);
  ~ForwardTrace();
  ForwardTrace(ForwardTrace&&) noexcept;
  ForwardTrace& operator=(ForwardTrace&&) noexcept;

  // Weighted sum of pair losses.
  double loss() const { return loss_; }
  const std::vector<PairOutput>& pairs() const { return pairs_; }
  const ViewTable& views() const { return views_; }

 private:
  friend ModelParams ComputeGradients(const ForwardTrace& trace);
  struct Slot;

  const ModelParams* params_;
  const CombinationConfig* combination_;
  const BatchSamples* batch_;
  std::vector<int> negatives_;
  std::vector<std::unique_ptr<Slot>> slots_;
  ViewTable views_;
  std::vector<PairOutput> pairs_;
  double loss_ = 0.0;
};

// Exact gradient of trace.loss() with respect to every parameter tensor.
// ReLU sub-gradient at 0 is 0; clamped scores contribute no gradient.
ModelParams ComputeGradients(const ForwardTrace& trace);

}  // namespace mag
