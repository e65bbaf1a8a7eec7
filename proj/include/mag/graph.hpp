#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace mag {

using NodeId = std::int32_t;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class AnomalyKind : std::uint8_t { kNormal = 0, kStructural = 1, kContextual = 2 };

const char* AnomalyKindName(AnomalyKind kind);
std::optional<AnomalyKind> ParseAnomalyKind(const std::string& s);

// Attributed undirected graph. Adjacency is kept in CSR form with sorted
// neighbor lists; no self-loops are stored and every edge appears in both
// directions. Labels are either empty (clean graph) or one per node.
class Graph {
 public:
  Graph() = default;

  // Builds from an undirected edge list. Reversed and duplicate pairs are
  // merged; self-loops and out-of-range endpoints throw.
  Graph(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges,
        Matrix features, std::vector<AnomalyKind> labels = {});

  // Takes raw CSR arrays without checking them. Use ValidateGraph() to audit.
  static Graph FromRawCsr(std::vector<std::int64_t> row_ptr,
                          std::vector<NodeId> col_idx, Matrix features,
                          std::vector<AnomalyKind> labels = {});

  std::size_t num_nodes() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  // Undirected edges, each counted once.
  std::size_t num_edges() const { return col_idx_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v],
            static_cast<std::size_t>(row_ptr_[v + 1] - row_ptr_[v])};
  }
  std::size_t degree(NodeId v) const {
    return static_cast<std::size_t>(row_ptr_[v + 1] - row_ptr_[v]);
  }
  bool has_edge(NodeId u, NodeId v) const;

  const Matrix& features() const { return features_; }
  const std::vector<AnomalyKind>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }
  AnomalyKind label(NodeId v) const {
    return labels_.empty() ? AnomalyKind::kNormal : labels_[v];
  }
  std::size_t num_anomalies() const;

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<NodeId>& col_idx() const { return col_idx_; }

  // Undirected edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> EdgeList() const;

  Graph WithEdges(std::span<const std::pair<NodeId, NodeId>> edges) const;
  Graph WithFeatures(Matrix features) const;
  Graph WithLabels(std::vector<AnomalyKind> labels) const;
  Graph WithoutLabels() const { return WithLabels({}); }

  // 0/1 binary anomaly indicator (structural or contextual -> 1).
  std::vector<int> BinaryLabels() const;

 private:
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<NodeId> col_idx_;
  Matrix features_;
  std::vector<AnomalyKind> labels_;
};

// Â = D^{-1/2}(A+I)D^{-1/2}, D the degree matrix of A+I.
struct NormalizedAdjacency {
  SparseMatrix values;
  std::size_t num_nodes() const { return static_cast<std::size_t>(values.rows()); }
};

NormalizedAdjacency NormalizeAdjacency(const Graph& g);

// Local subgraph over an ordered node list. Repeated node ids are distinct
// positions without mutual edges.
struct LocalSubgraph {
  Matrix adjacency;  // normalized, m x m
  Matrix features;   // m x d
};

// Normalized local adjacency only (no feature block).
Matrix InducedAdjacency(const Graph& g, std::span<const NodeId> nodes);
LocalSubgraph InducedSubgraph(const Graph& g, std::span<const NodeId> nodes);

struct GraphReport {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::size_t feature_dim = 0;
  std::size_t isolated_nodes = 0;
  std::size_t structural = 0;
  std::size_t contextual = 0;
  std::size_t anomalies() const { return structural + contextual; }
};

// Checks every Graph invariant; throws Error(kValidation) naming the first
// violated one.
GraphReport ValidateGraph(const Graph& g);

Graph LoadGraph(const std::string& edge_path, const std::string& feature_path,
                const std::optional<std::string>& label_path = std::nullopt);

void SaveEdges(const Graph& g, const std::string& path);
void SaveFeatures(const Graph& g, const std::string& path);
// Writes "node,kind" rows for every anomalous node.
void SaveLabels(const Graph& g, const std::string& path);

}  // namespace mag
