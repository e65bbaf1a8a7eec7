#include "mag/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_set>

#include <Eigen/SparseCholesky>

#include "mag/error.hpp"

namespace mag {

const char* AugmentOpName(AugmentOp op) {
  switch (op) {
    case AugmentOp::kMaskFeatures: return "mask_features";
    case AugmentOp::kRemoveEdges: return "remove_edges";
    case AugmentOp::kFlipEdges: return "flip_edges";
    case AugmentOp::kPpr: return "ppr";
    case AugmentOp::kHeat: return "heat";
  }
  return "?";
}

void AugmentStep::Validate() const {
  auto bad = [this](const std::string& msg) {
    throw Error(ErrorKind::kConfig, std::string(AugmentOpName(op)) + ": " + msg);
  };
  switch (op) {
    case AugmentOp::kMaskFeatures:
    case AugmentOp::kRemoveEdges:
    case AugmentOp::kFlipEdges:
      if (!(p >= 0.0 && p <= 1.0)) bad("p must lie in [0, 1]");
      break;
    case AugmentOp::kPpr:
      if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha must lie in (0, 1)");
      if (!(keep_eps >= 0.0)) bad("keep_eps must be >= 0");
      break;
    case AugmentOp::kHeat:
      if (!(t > 0.0)) bad("t must be > 0");
      if (!(keep_eps >= 0.0)) bad("keep_eps must be >= 0");
      break;
  }
}

void AugmentationSpec::Validate() const {
  for (const auto& s : steps) s.Validate();
}

AugmentationSpec DefaultAugmentation() {
  AugmentationSpec spec;
  spec.steps = {AugmentStep::Mask(0.2), AugmentStep::Remove(0.2)};
  return spec;
}

Matrix MaskFeatures(const Matrix& x, double p, Rng& rng, bool per_node) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kConfig, "mask probability must lie in [0, 1]");
  std::bernoulli_distribution keep(1.0 - p);
  Matrix out = x;
  if (per_node) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (!keep(rng)) out(i, j) = 0.0;
      }
    }
    return out;
  }
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (!keep(rng)) out.col(j).setZero();
  }
  return out;
}

namespace {

std::size_t RoundedCount(double p, std::size_t total) {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(total)));
}

// Indices of k uniformly chosen items out of [0, n).
std::vector<std::size_t> ChooseIndices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::uint64_t PairKey(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

std::vector<double> InverseSqrtDegrees(const Graph& g) {
  std::vector<double> out(g.num_nodes());
  for (NodeId v = 0; v < static_cast<NodeId>(g.num_nodes()); ++v) {
    if (g.degree(v) == 0) {
      throw Error(ErrorKind::kDegenerate,
                  "node " + std::to_string(v) + " has zero degree; diffusion needs D^{-1/2}");
    }
    out[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
  }
  return out;
}

using ColumnSink = std::function<void(NodeId column, const Vector& values)>;

void ForEachPprColumn(const Graph& g, double alpha, const ColumnSink& sink) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::kConfig, "alpha must lie in (0, 1)");
  const auto n = static_cast<NodeId>(g.num_nodes());
  const auto inv_sqrt = InverseSqrtDegrees(g);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.col_idx().size() + n);
  for (NodeId u = 0; u < n; ++u) {
    triplets.emplace_back(u, u, 1.0);
    for (NodeId v : g.neighbors(u)) {
      triplets.emplace_back(u, v, -(1.0 - alpha) * inv_sqrt[u] * inv_sqrt[v]);
    }
  }
  // I - (1 - alpha) T is symmetric positive definite: eigenvalues of T lie in [-1, 1].
  Eigen::SparseMatrix<double> system(n, n);
  system.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumerical, "PPR system factorization failed");
  }
  Vector rhs = Vector::Zero(n);
  for (NodeId j = 0; j < n; ++j) {
    rhs[j] = 1.0;
    Vector col = solver.solve(rhs);
    const double residual = (system * col - rhs).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-8)) {
      throw Error(ErrorKind::kNumerical,
                  "PPR solve residual " + std::to_string(residual) + " exceeds 1e-8 at column " + std::to_string(j));
    }
    rhs[j] = 0.0;
    col *= alpha;
    sink(j, col);
  }
}

// Smallest K with P(Poisson(t) > K) < tol, bounding the truncated series tail
// (A D^{-1} has unit 1-norm).
int HeatTruncation(double t, double tol) {
  double pmf = std::exp(-t);
  double cdf = pmf;
  int k = 0;
  while (1.0 - cdf >= tol && k < 10000) {
    ++k;
    pmf *= t / k;
    cdf += pmf;
    // Guard against cdf rounding to just under 1 forever.
    if (pmf < tol * 1e-3 && k > t) break;
  }
  return k;
}

void ForEachHeatColumn(const Graph& g, double t, const ColumnSink& sink) {
  if (!(t > 0.0)) throw Error(ErrorKind::kConfig, "t must be > 0");
  const auto n = static_cast<NodeId>(g.num_nodes());
  std::vector<double> inv_deg(n);
  for (NodeId v = 0; v < n; ++v) {
    if (g.degree(v) == 0) {
      throw Error(ErrorKind::kDegenerate,
                  "node " + std::to_string(v) + " has zero degree; heat kernel needs D^{-1}");
    }
    inv_deg[v] = 1.0 / static_cast<double>(g.degree(v));
  }
  const int terms = HeatTruncation(t, 1e-12);
  const double scale = std::exp(-t);
  Vector term(n), next(n), acc(n);
  for (NodeId j = 0; j < n; ++j) {
    term.setZero();
    term[j] = 1.0;
    acc = term;
    for (int k = 1; k <= terms; ++k) {
      // next = (t / k) * A D^{-1} term
      for (NodeId i = 0; i < n; ++i) {
        double s = 0.0;
        for (NodeId v : g.neighbors(i)) s += term[v] * inv_deg[v];
        next[i] = s * (t / k);
      }
      term.swap(next);
      acc += term;
    }
    acc *= scale;
    sink(j, acc);
  }
}

Graph ThresholdColumns(const Graph& g, double keep_eps,
                       const std::function<void(const ColumnSink&)>& produce) {
  EdgeList kept;
  produce([&](NodeId j, const Vector& col) {
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (i != j && std::abs(col[i]) >= keep_eps) {
        kept.emplace_back(std::min<NodeId>(i, j), std::max<NodeId>(i, j));
      }
    }
  });
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return g.WithEdges(kept);
}

}  // namespace

Graph RemoveEdges(const Graph& g, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kConfig, "edge ratio must lie in [0, 1]");
  auto edges = g.EdgeList();
  const std::size_t drop = RoundedCount(p, edges.size());
  if (drop == 0) return g;
  auto chosen = ChooseIndices(edges.size(), drop, rng);
  std::vector<char> removed(edges.size(), 0);
  for (auto i : chosen) removed[i] = 1;
  EdgeList kept;
  kept.reserve(edges.size() - drop);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!removed[i]) kept.push_back(edges[i]);
  }
  return g.WithEdges(kept);
}

EdgeList SampleFlipLocations(const Graph& g, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kConfig, "edge ratio must lie in [0, 1]");
  const auto edges = g.EdgeList();
  const std::size_t total = RoundedCount(p, edges.size());
  const std::size_t on_edges = total / 2;
  const std::size_t on_non_edges = total - on_edges;
  const auto n = static_cast<long long>(g.num_nodes());
  const long long num_non_edges = n * (n - 1) / 2 - static_cast<long long>(edges.size());
  if (on_edges > edges.size() || static_cast<long long>(on_non_edges) > num_non_edges) {
    throw Error(ErrorKind::kCapacity, "graph cannot supply " + std::to_string(on_edges) + " edges and " +
                                          std::to_string(on_non_edges) + " non-edges to flip");
  }
  EdgeList out;
  out.reserve(total);
  for (auto i : ChooseIndices(edges.size(), on_edges, rng)) out.push_back(edges[i]);

  if (on_non_edges > 0) {
    if (num_non_edges < 4 * static_cast<long long>(on_non_edges)) {
      EdgeList candidates;
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (!g.has_edge(u, v)) candidates.emplace_back(u, v);
        }
      }
      for (auto i : ChooseIndices(candidates.size(), on_non_edges, rng)) out.push_back(candidates[i]);
    } else {
      std::unordered_set<std::uint64_t> seen;
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
      while (seen.size() < on_non_edges) {
        NodeId u = pick(rng), v = pick(rng);
        if (u == v || g.has_edge(u, v)) continue;
        if (seen.insert(PairKey(u, v)).second) out.emplace_back(std::min(u, v), std::max(u, v));
      }
    }
  }
  return out;
}

Graph ApplyFlip(const Graph& g, const EdgeList& locations) {
  std::unordered_set<std::uint64_t> flip;
  flip.reserve(locations.size() * 2);
  for (auto [u, v] : locations) {
    if (u == v) throw Error(ErrorKind::kValidation, "perturbation location on a self-pair");
    if (!flip.insert(PairKey(u, v)).second) {
      throw Error(ErrorKind::kValidation, "duplicate perturbation location");
    }
  }
  EdgeList out;
  for (auto e : g.EdgeList()) {
    if (!flip.count(PairKey(e.first, e.second))) out.push_back(e);
  }
  for (auto [u, v] : locations) {
    if (!g.has_edge(u, v)) out.emplace_back(std::min(u, v), std::max(u, v));
  }
  return g.WithEdges(out);
}

Graph FlipEdges(const Graph& g, double p, Rng& rng) {
  return ApplyFlip(g, SampleFlipLocations(g, p, rng));
}

Matrix PprMatrix(const Graph& g, double alpha) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix s(n, n);
  ForEachPprColumn(g, alpha, [&](NodeId j, const Vector& col) { s.col(j) = col; });
  return s;
}

Matrix HeatMatrix(const Graph& g, double t) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix s(n, n);
  ForEachHeatColumn(g, t, [&](NodeId j, const Vector& col) { s.col(j) = col; });
  return s;
}

Graph PprDiffuse(const Graph& g, double alpha, double keep_eps) {
  return ThresholdColumns(g, keep_eps, [&](const ColumnSink& sink) { ForEachPprColumn(g, alpha, sink); });
}

Graph HeatDiffuse(const Graph& g, double t, double keep_eps) {
  return ThresholdColumns(g, keep_eps, [&](const ColumnSink& sink) { ForEachHeatColumn(g, t, sink); });
}

Graph ApplyStep(const Graph& g, const AugmentStep& step, Rng& rng) {
  step.Validate();
  switch (step.op) {
    case AugmentOp::kMaskFeatures:
      return g.WithFeatures(MaskFeatures(g.features(), step.p, rng, step.per_node));
    case AugmentOp::kRemoveEdges: return RemoveEdges(g, step.p, rng);
    case AugmentOp::kFlipEdges: return FlipEdges(g, step.p, rng);
    case AugmentOp::kPpr: return PprDiffuse(g, step.alpha, step.keep_eps);
    case AugmentOp::kHeat: return HeatDiffuse(g, step.t, step.keep_eps);
  }
  return g;
}

Graph ComposeAugmentation(const Graph& g, const AugmentationSpec& spec, Rng& rng) {
  spec.Validate();
  Graph out = g;
  for (const auto& step : spec.steps) out = ApplyStep(out, step, rng);
  return out;
}

Graph ComposeAugmentation(const Graph& g, const AugmentationSpec& spec) {
  Rng rng = MakeRng(spec.seed, {stream::kAugment});
  return ComposeAugmentation(g, spec, rng);
}

Augmenter::Augmenter(const Graph& base, AugmentationSpec spec) : spec_(std::move(spec)), prefix_(base) {
  spec_.Validate();
  Rng unused(0);
  while (tail_begin_ < spec_.steps.size() && !spec_.steps[tail_begin_].stochastic()) {
    prefix_ = ApplyStep(prefix_, spec_.steps[tail_begin_], unused);
    ++tail_begin_;
  }
}

bool Augmenter::stochastic() const { return tail_begin_ < spec_.steps.size(); }

Graph Augmenter::Draw(Rng& rng) const {
  Graph out = prefix_;
  for (std::size_t i = tail_begin_; i < spec_.steps.size(); ++i) out = ApplyStep(out, spec_.steps[i], rng);
  return out;
}

}  // namespace mag
