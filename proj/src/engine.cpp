#include "mag/engine.hpp"

#include <algorithm>

#include "mag/error.hpp"

namespace mag {

// Everything computed for one (graph, backbone) slot.
struct ForwardTrace::Slot {
  GraphSlot graph_slot = GraphSlot::kOriginal;
  int gnn = 1;
  const Graph* graph = nullptr;
  const std::vector<SampledSubgraph>* samples = nullptr;
  bool subgraph = false;  // subgraph or masked-node views requested
  bool node = false;

  // Subgraph path. Input rows of instance i are projections of distinct
  // non-target nodes; rows holding the target are zero.
  std::vector<NodeId> unique_nodes;
  std::vector<std::vector<int>> row_source;  // per instance, per position: index into unique_nodes or -1
  Matrix projected;                          // unique_nodes x h (layer 0, before aggregation)
  std::vector<std::vector<Matrix>> pre;      // per instance, per layer: m x h pre-activation
  std::vector<std::vector<Matrix>> inputs;   // per instance, per layer >= 1: m x h layer input
  std::vector<Matrix> output;                // per instance: m x h

  // Node path, N x h per layer.
  Matrix node_features;  // N x d target rows
  std::vector<Matrix> node_pre;
  std::vector<Matrix> node_inputs;  // index l holds input of layer l (l >= 1)
  Matrix node_output;
};

ForwardTrace::~ForwardTrace() = default;
ForwardTrace::ForwardTrace(ForwardTrace&&) noexcept = default;
ForwardTrace& ForwardTrace::operator=(ForwardTrace&&) noexcept = default;

ForwardTrace::ForwardTrace(const ModelParams& params, const CombinationConfig& combination, const Graph& original,
                           const Graph* augmented, const BatchSamples& batch, std::span<const int> negatives)
    : params_(&params), combination_(&combination), batch_(&batch), negatives_(negatives.begin(), negatives.end()) {
  combination.Validate();
  if (params.discriminators.size() != combination.pairs.size()) {
    throw Error(ErrorKind::kDimension, "model has " + std::to_string(params.discriminators.size()) +
                                           " discriminators for " + std::to_string(combination.pairs.size()) +
                                           " pairs");
  }
  if (static_cast<Eigen::Index>(original.feature_dim()) != params.input_dim()) {
    throw Error(ErrorKind::kDimension, "graph feature dimension " + std::to_string(original.feature_dim()) +
                                           " differs from model input dimension " +
                                           std::to_string(params.input_dim()));
  }
  const std::size_t n = batch.size();
  if (n < 2) throw Error(ErrorKind::kConfig, "a contrast batch needs at least two targets");
  if (negatives_.size() != n) throw Error(ErrorKind::kDimension, "negative permutation length differs from batch");
  CheckDerangement(negatives_);
  const auto needed = combination.NeededViews();
  const bool wants_aug = combination.UsesAugmented();
  if (wants_aug && (augmented == nullptr || batch.augmented.size() != n)) {
    throw Error(ErrorKind::kConfig, "combination uses augmented views but no augmented graph/samples were given");
  }

  const Eigen::Index h = params.hidden_dim();
  const int depth = params.depth();

  for (int gs = 0; gs < 2; ++gs) {
    for (int gnn = 1; gnn <= 2; ++gnn) {
      auto slot = std::make_unique<Slot>();
      slot->graph_slot = static_cast<GraphSlot>(gs);
      slot->gnn = gnn;
      for (ViewId v : needed) {
        if (v.graph() != slot->graph_slot || v.gnn() != gnn) continue;
        if (v.kind() == ViewKind::kNode) {
          slot->node = true;
        } else {
          slot->subgraph = true;
        }
      }
      if (!slot->subgraph && !slot->node) {
        slots_.push_back(std::move(slot));
        continue;
      }
      slot->graph = slot->graph_slot == GraphSlot::kOriginal ? &original : augmented;
      slot->samples = slot->graph_slot == GraphSlot::kOriginal ? &batch.original : &batch.augmented;
      const Graph& g = *slot->graph;
      const auto& samples = *slot->samples;
      const BackboneParams& w = params.backbones[gnn - 1];

      if (slot->subgraph) {
        std::vector<int> compact(g.num_nodes(), -1);
        slot->row_source.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto& s = samples[i];
          auto& src = slot->row_source[i];
          src.assign(s.nodes.size(), -1);
          for (std::size_t r = 0; r < s.nodes.size(); ++r) {
            const NodeId v = s.nodes[r];
            if (v == s.target) continue;
            if (compact[v] < 0) {
              compact[v] = static_cast<int>(slot->unique_nodes.size());
              slot->unique_nodes.push_back(v);
            }
            src[r] = compact[v];
          }
        }
        Matrix gathered(static_cast<Eigen::Index>(slot->unique_nodes.size()), g.features().cols());
        for (std::size_t u = 0; u < slot->unique_nodes.size(); ++u) {
          gathered.row(static_cast<Eigen::Index>(u)) = g.features().row(slot->unique_nodes[u]);
        }
        slot->projected = Project(gathered, w.layers[0]);

        slot->pre.resize(n);
        slot->inputs.resize(n);
        slot->output.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const auto& s = samples[i];
          const auto m = static_cast<Eigen::Index>(s.nodes.size());
          Matrix rows = Matrix::Zero(m, h);
          for (Eigen::Index r = 0; r < m; ++r) {
            const int src = slot->row_source[i][r];
            if (src >= 0) rows.row(r) = slot->projected.row(src);
          }
          auto& pre = slot->pre[i];
          auto& in = slot->inputs[i];
          pre.resize(depth);
          in.resize(depth);
          pre[0] = s.adjacency * rows;
          Matrix act = Relu(pre[0]);
          for (int l = 1; l < depth; ++l) {
            in[l] = std::move(act);
            pre[l] = s.adjacency * (in[l] * w.layers[l]);
            act = Relu(pre[l]);
          }
          slot->output[i] = std::move(act);
        }
      }

      if (slot->node) {
        slot->node_features.resize(static_cast<Eigen::Index>(n), g.features().cols());
        for (std::size_t i = 0; i < n; ++i) {
          slot->node_features.row(static_cast<Eigen::Index>(i)) = g.features().row(samples[i].target);
        }
        slot->node_pre.resize(depth);
        slot->node_inputs.resize(depth);
        slot->node_pre[0] = Project(slot->node_features, w.layers[0]);
        Matrix act = Relu(slot->node_pre[0]);
        for (int l = 1; l < depth; ++l) {
          slot->node_inputs[l] = std::move(act);
          slot->node_pre[l] = slot->node_inputs[l] * w.layers[l];
          act = Relu(slot->node_pre[l]);
        }
        slot->node_output = std::move(act);
      }

      for (ViewId v : needed) {
        if (v.graph() != slot->graph_slot || v.gnn() != gnn) continue;
        Matrix table(static_cast<Eigen::Index>(n), h);
        for (std::size_t i = 0; i < n; ++i) {
          const auto row = static_cast<Eigen::Index>(i);
          switch (v.kind()) {
            case ViewKind::kSubgraph: table.row(row) = slot->output[i].colwise().mean(); break;
            case ViewKind::kMaskedNode: table.row(row) = slot->output[i].row(0); break;
            case ViewKind::kNode: table.row(row) = slot->node_output.row(row); break;
          }
        }
        views_.emplace(v, std::move(table));
      }
      slots_.push_back(std::move(slot));
    }
  }

  pairs_.resize(combination.pairs.size());
  std::vector<double> losses(combination.pairs.size());
  for (std::size_t k = 0; k < combination.pairs.size(); ++k) {
    const auto& pair = combination.pairs[k];
    const Matrix& a = views_.at(pair.first);
    const Matrix& b = views_.at(pair.second);
    const Matrix& bil = params.discriminators[k].bilinear;
    // Row i of bb is (B b_i)^T.
    const Matrix bb = b * bil.transpose();
    auto& out = pairs_[k];
    out.y_pos.resize(n);
    out.y_neg.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      out.y_pos[i] = Sigmoid(a.row(row).dot(bb.row(row)));
      out.y_neg[i] = Sigmoid(a.row(negatives_[i]).dot(bb.row(row)));
    }
    out.loss = ContrastBce(out.y_pos, out.y_neg);
    losses[k] = out.loss;
  }
  loss_ = CombineLosses(losses, combination.weights);
}

namespace {

bool Unclamped(double y) { return y >= kScoreFloor && y <= 1.0 - kScoreFloor; }

}  // namespace

ModelParams ComputeGradients(const ForwardTrace& trace) {
  const ModelParams& params = *trace.params_;
  const CombinationConfig& combination = *trace.combination_;
  const std::size_t n = trace.batch_->size();
  const auto inv_n = 1.0 / static_cast<double>(n);
  ModelParams grads = params.ZerosLike();

  ViewTable dviews;
  for (const auto& [view, table] : trace.views_) dviews.emplace(view, Matrix::Zero(table.rows(), table.cols()));

  for (std::size_t k = 0; k < combination.pairs.size(); ++k) {
    const double weight = combination.weights[k];
    if (weight == 0.0) continue;
    const auto& pair = combination.pairs[k];
    const auto& out = trace.pairs_[k];
    const Matrix& a = trace.views_.at(pair.first);
    const Matrix& b = trace.views_.at(pair.second);
    const Matrix& bil = params.discriminators[k].bilinear;
    Matrix& da = dviews.at(pair.first);
    Matrix& db = dviews.at(pair.second);
    Matrix& dbil = grads.discriminators[k].bilinear;
    const Matrix bb = b * bil.transpose();  // rows (B b_i)^T
    const Matrix ab = a * bil;              // rows a_j^T B
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const auto neg = static_cast<Eigen::Index>(trace.negatives_[i]);
      // d/dlogit of -log(y) is -(1 - y); of -log(1 - y) is y.
      const double gpos = Unclamped(out.y_pos[i]) ? -weight * inv_n * (1.0 - out.y_pos[i]) : 0.0;
      const double gneg = Unclamped(out.y_neg[i]) ? weight * inv_n * out.y_neg[i] : 0.0;
      dbil.noalias() += gpos * a.row(row).transpose() * b.row(row);
      dbil.noalias() += gneg * a.row(neg).transpose() * b.row(row);
      da.row(row) += gpos * bb.row(row);
      da.row(neg) += gneg * bb.row(row);
      db.row(row) += gpos * ab.row(row) + gneg * ab.row(neg);
    }
  }

  const int depth = params.depth();
  for (const auto& slot_ptr : trace.slots_) {
    const auto& slot = *slot_ptr;
    if (!slot.subgraph && !slot.node) continue;
    const BackboneParams& w = params.backbones[slot.gnn - 1];
    BackboneParams& dw = grads.backbones[slot.gnn - 1];
    auto dview = [&](ViewKind kind) -> const Matrix* {
      auto it = dviews.find(ViewId::Encode({slot.graph_slot, slot.gnn, kind}));
      return it == dviews.end() ? nullptr : &it->second;
    };

    if (slot.subgraph) {
      const Matrix* dsub = dview(ViewKind::kSubgraph);
      const Matrix* dmasked = dview(ViewKind::kMaskedNode);
      Matrix dprojected = Matrix::Zero(slot.projected.rows(), slot.projected.cols());
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto& s = (*slot.samples)[i];
        const auto m = static_cast<Eigen::Index>(s.nodes.size());
        Matrix dh = Matrix::Zero(m, params.hidden_dim());
        if (dsub) dh.rowwise() += dsub->row(row) / static_cast<double>(m);
        if (dmasked) dh.row(0) += dmasked->row(row);
        for (int l = depth - 1; l >= 0; --l) {
          const Matrix dpre = dh.cwiseProduct((slot.pre[i][l].array() > 0.0).cast<double>().matrix());
          const Matrix dq = s.adjacency.transpose() * dpre;
          if (l > 0) {
            dw.layers[l].noalias() += slot.inputs[i][l].transpose() * dq;
            dh = dq * w.layers[l].transpose();
          } else {
            for (Eigen::Index r = 0; r < m; ++r) {
              const int src = slot.row_source[i][r];
              if (src >= 0) dprojected.row(src) += dq.row(r);
            }
          }
        }
      }
      for (std::size_t u = 0; u < slot.unique_nodes.size(); ++u) {
        AccumulateOuter(dw.layers[0], slot.graph->features().row(slot.unique_nodes[u]),
                        dprojected.row(static_cast<Eigen::Index>(u)));
      }
    }

    if (slot.node) {
      const Matrix* dnode = dview(ViewKind::kNode);
      if (!dnode) continue;
      Matrix dz = *dnode;
      for (int l = depth - 1; l >= 0; --l) {
        const Matrix dpre = dz.cwiseProduct((slot.node_pre[l].array() > 0.0).cast<double>().matrix());
        if (l > 0) {
          dw.layers[l].noalias() += slot.node_inputs[l].transpose() * dpre;
          dz = dpre * w.layers[l].transpose();
        } else {
          for (Eigen::Index i = 0; i < dpre.rows(); ++i) {
            AccumulateOuter(dw.layers[0], slot.node_features.row(i), dpre.row(i));
          }
        }
      }
    }
  }
  return grads;
}

}  // namespace mag
