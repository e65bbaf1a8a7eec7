#include "mag/nn.hpp"

#include <algorithm>
#include <cmath>

#include "mag/error.hpp"
#include "mag/rng.hpp"

namespace mag {

namespace {

Matrix GlorotUniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

ModelParams ModelParams::Init(int input_dim, int hidden_dim, int depth, int num_pairs, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || depth < 1 || num_pairs < 1) {
    throw Error(ErrorKind::kConfig, "model dimensions, depth and pair count must be positive");
  }
  Rng rng = MakeRng(seed, {stream::kInit});
  ModelParams p;
  for (auto& backbone : p.backbones) {
    for (int l = 0; l < depth; ++l) {
      backbone.layers.push_back(GlorotUniform(l == 0 ? input_dim : hidden_dim, hidden_dim, rng));
    }
  }
  for (int k = 0; k < num_pairs; ++k) {
    p.discriminators.push_back({GlorotUniform(hidden_dim, hidden_dim, rng)});
  }
  return p;
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  for (Matrix* t : z.Tensors()) t->setZero();
  return z;
}

std::vector<Matrix*> ModelParams::Tensors() {
  std::vector<Matrix*> out;
  for (auto& b : backbones) {
    for (auto& w : b.layers) out.push_back(&w);
  }
  for (auto& d : discriminators) out.push_back(&d.bilinear);
  return out;
}

std::vector<const Matrix*> ModelParams::Tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& b : backbones) {
    for (const auto& w : b.layers) out.push_back(&w);
  }
  for (const auto& d : discriminators) out.push_back(&d.bilinear);
  return out;
}

std::vector<std::string> ModelParams::TensorNames() const {
  std::vector<std::string> out;
  for (int b = 0; b < 2; ++b) {
    for (int l = 0; l < backbones[b].depth(); ++l) {
      out.push_back("gnn" + std::to_string(b + 1) + ".w" + std::to_string(l));
    }
  }
  for (std::size_t k = 0; k < discriminators.size(); ++k) out.push_back("disc" + std::to_string(k) + ".b");
  return out;
}

Matrix Project(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.rows()) {
    throw Error(ErrorKind::kDimension, "projection shape mismatch: " + std::to_string(x.cols()) + " vs " +
                                           std::to_string(w.rows()));
  }
  Matrix out = Matrix::Zero(x.rows(), w.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double v = x(i, k);
      if (v != 0.0) out.row(i).noalias() += v * w.row(k);
    }
  }
  return out;
}

void AccumulateOuter(Matrix& dw, const Eigen::Ref<const RowVector>& x, const Eigen::Ref<const RowVector>& g) {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x[k];
    if (v != 0.0) dw.row(k).noalias() += v * g;
  }
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix Relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix GcnForward(const Matrix& adjacency, const Matrix& x, const BackboneParams& w) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != x.rows()) {
    throw Error(ErrorKind::kDimension, "adjacency and feature block disagree on node count");
  }
  if (w.layers.empty()) throw Error(ErrorKind::kDimension, "backbone has no layers");
  Matrix h = x;
  for (const Matrix& layer : w.layers) {
    h = Relu(adjacency * Project(h, layer));
  }
  return h;
}

RowVector NodeEmbed(const RowVector& x, const BackboneParams& w) {
  if (w.layers.empty()) throw Error(ErrorKind::kDimension, "backbone has no layers");
  Matrix h = x;
  for (const Matrix& layer : w.layers) h = Relu(Project(h, layer));
  return h.row(0);
}

RowVector ReadoutMean(const Matrix& h) {
  if (h.rows() < 1) throw Error(ErrorKind::kDimension, "readout of an empty block");
  return h.colwise().mean();
}

double BilinearScore(const RowVector& a, const RowVector& b, const DiscriminatorParams& disc) {
  if (a.size() != disc.bilinear.rows() || b.size() != disc.bilinear.cols()) {
    throw Error(ErrorKind::kDimension, "bilinear operand shape mismatch");
  }
  return Sigmoid(a.dot(disc.bilinear * b.transpose()));
}

double ClampScore(double y) { return std::clamp(y, kScoreFloor, 1.0 - kScoreFloor); }

double ContrastBce(std::span<const double> y_pos, std::span<const double> y_neg) {
  if (y_pos.size() != y_neg.size() || y_pos.empty()) {
    throw Error(ErrorKind::kDimension, "contrast batches must be non-empty and of equal size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < y_pos.size(); ++i) {
    sum += std::log(ClampScore(y_pos[i])) + std::log(1.0 - ClampScore(y_neg[i]));
  }
  return -sum / static_cast<double>(y_pos.size());
}

AdamState AdamState::For(const ModelParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (const Matrix* t : params.Tensors()) {
    s.first.push_back(Matrix::Zero(t->rows(), t->cols()));
    s.second.push_back(Matrix::Zero(t->rows(), t->cols()));
  }
  return s;
}

void AdamStep(ModelParams& params, const ModelParams& grads, AdamState& state) {
  auto p = params.Tensors();
  auto g = grads.Tensors();
  if (p.size() != g.size() || p.size() != state.first.size()) {
    throw Error(ErrorKind::kDimension, "Adam state does not match parameter layout");
  }
  const auto names = params.TensorNames();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i]->rows() != p[i]->rows() || g[i]->cols() != p[i]->cols()) {
      throw Error(ErrorKind::kDimension, "gradient shape mismatch for " + names[i]);
    }
    if (!g[i]->allFinite()) {
      throw Error(ErrorKind::kNumerical, "non-finite gradient in " + names[i] + " at step " +
                                             std::to_string(state.step + 1));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix& m = state.first[i];
    Matrix& v = state.second[i];
    m = state.beta1 * m + (1.0 - state.beta1) * *g[i];
    v = state.beta2 * v + (1.0 - state.beta2) * g[i]->cwiseProduct(*g[i]);
    *p[i] -= (state.lr * (m / c1).array() / ((v / c2).array().sqrt() + state.eps)).matrix();
  }
}

}  // namespace mag
