#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mag/graph.hpp"

namespace mag {

// One GCN backbone: layer 0 maps d -> h, further layers h -> h.
struct BackboneParams {
  std::vector<Matrix> layers;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().rows()); }
  int hidden_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().cols()); }
  int depth() const { return static_cast<int>(layers.size()); }
};

struct DiscriminatorParams {
  Matrix bilinear;  // h x h
};

// Two backbones (GNN-1, GNN-2) shared by the original and augmented graphs,
// plus one bilinear discriminator per contrast pair.
struct ModelParams {
  std::array<BackboneParams, 2> backbones;
  std::vector<DiscriminatorParams> discriminators;

  // Glorot-uniform initialization, seeded.
  static ModelParams Init(int input_dim, int hidden_dim, int depth, int num_pairs, std::uint64_t seed);
  // Same shapes, all zeros.
  ModelParams ZerosLike() const;

  int input_dim() const { return backbones[0].input_dim(); }
  int hidden_dim() const { return backbones[0].hidden_dim(); }
  int depth() const { return backbones[0].depth(); }

  std::vector<Matrix*> Tensors();
  std::vector<const Matrix*> Tensors() const;
  // "gnn1.w0", ..., "disc0.b", ...
  std::vector<std::string> TensorNames() const;
};

// Row-block product x * w that skips zero entries of x. Used for every
// feature projection so sparse bag-of-words inputs stay cheap.
Matrix Project(const Matrix& x, const Matrix& w);
// dw += x^T g, again skipping zeros of x.
void AccumulateOuter(Matrix& dw, const Eigen::Ref<const RowVector>& x, const Eigen::Ref<const RowVector>& g);

double Sigmoid(double x);
Matrix Relu(const Matrix& x);

// H = relu(Â X W) per layer.
Matrix GcnForward(const Matrix& adjacency, const Matrix& x, const BackboneParams& w);
// relu(x W): the GCN on the one-node graph with only its self-loop.
RowVector NodeEmbed(const RowVector& x, const BackboneParams& w);
RowVector ReadoutMean(const Matrix& h);
// sigmoid(a^T B b).
double BilinearScore(const RowVector& a, const RowVector& b, const DiscriminatorParams& disc);

inline constexpr double kScoreFloor = 1e-7;
double ClampScore(double y);
// -(1/n) * sum(log y_pos + log(1 - y_neg)), scores clamped to [1e-7, 1 - 1e-7].
double ContrastBce(std::span<const double> y_pos, std::span<const double> y_neg);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step = 0;
  std::vector<Matrix> first;
  std::vector<Matrix> second;

  static AdamState For(const ModelParams& params, double lr);
};

// Bias-corrected Adam update. Throws Error(kNumerical) if any gradient entry
// is non-finite; params are left untouched in that case.
void AdamStep(ModelParams& params, const ModelParams& grads, AdamState& state);

}  // namespace mag
