#include "mag/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mag/error.hpp"

namespace mag {

const char* AnomalyKindName(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kNormal: return "normal";
    case AnomalyKind::kStructural: return "structural";
    case AnomalyKind::kContextual: return "contextual";
  }
  return "normal";
}

std::optional<AnomalyKind> ParseAnomalyKind(const std::string& s) {
  if (s == "normal" || s == "0") return AnomalyKind::kNormal;
  if (s == "structural" || s == "1") return AnomalyKind::kStructural;
  if (s == "contextual" || s == "2") return AnomalyKind::kContextual;
  return std::nullopt;
}

Graph::Graph(std::size_t num_nodes,
             std::span<const std::pair<NodeId, NodeId>> edges, Matrix features,
             std::vector<AnomalyKind> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<std::size_t>(features_.rows()) != num_nodes) {
    throw Error(ErrorKind::kDimension,
                "feature matrix has " + std::to_string(features_.rows()) +
                    " rows, expected " + std::to_string(num_nodes));
  }
  if (!labels_.empty() && labels_.size() != num_nodes) {
    throw Error(ErrorKind::kDimension, "label vector length differs from node count");
  }
  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * 2);
  const auto n = static_cast<std::int64_t>(num_nodes);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw Error(ErrorKind::kBounds, "edge (" + std::to_string(u) + "," +
                                          std::to_string(v) + ") out of range for n=" +
                                          std::to_string(num_nodes));
    }
    if (u == v) {
      throw Error(ErrorKind::kValidation, "self-loop on node " + std::to_string(u));
    }
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  row_ptr_.assign(num_nodes + 1, 0);
  col_idx_.resize(directed.size());
  for (auto [u, v] : directed) ++row_ptr_[u + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (std::size_t k = 0; k < directed.size(); ++k) col_idx_[k] = directed[k].second;
}

Graph Graph::FromRawCsr(std::vector<std::int64_t> row_ptr, std::vector<NodeId> col_idx,
                        Matrix features, std::vector<AnomalyKind> labels) {
  Graph g;
  g.row_ptr_ = std::move(row_ptr);
  g.col_idx_ = std::move(col_idx);
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::size_t Graph::num_anomalies() const {
  return static_cast<std::size_t>(std::count_if(
      labels_.begin(), labels_.end(), [](AnomalyKind k) { return k != AnomalyKind::kNormal; }));
}

std::vector<std::pair<NodeId, NodeId>> Graph::EdgeList() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < static_cast<NodeId>(num_nodes()); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph Graph::WithEdges(std::span<const std::pair<NodeId, NodeId>> edges) const {
  return Graph(num_nodes(), edges, features_, labels_);
}

Graph Graph::WithFeatures(Matrix features) const {
  if (features.rows() != features_.rows()) {
    throw Error(ErrorKind::kDimension, "replacement feature matrix has wrong row count");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::WithLabels(std::vector<AnomalyKind> labels) const {
  if (!labels.empty() && labels.size() != num_nodes()) {
    throw Error(ErrorKind::kDimension, "label vector length differs from node count");
  }
  Graph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

std::vector<int> Graph::BinaryLabels() const {
  std::vector<int> out(num_nodes(), 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out[i] = labels_[i] == AnomalyKind::kNormal ? 0 : 1;
  }
  return out;
}

NormalizedAdjacency NormalizeAdjacency(const Graph& g) {
  const auto n = static_cast<NodeId>(g.num_nodes());
  std::vector<double> inv_sqrt(n);
  for (NodeId v = 0; v < n; ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.col_idx().size() + n);
  for (NodeId u = 0; u < n; ++u) {
    triplets.emplace_back(u, u, inv_sqrt[u] * inv_sqrt[u]);
    for (NodeId v : g.neighbors(u)) triplets.emplace_back(u, v, inv_sqrt[u] * inv_sqrt[v]);
  }
  NormalizedAdjacency out;
  out.values.resize(n, n);
  out.values.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Matrix InducedAdjacency(const Graph& g, std::span<const NodeId> nodes) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  if (m == 0) throw Error(ErrorKind::kBounds, "induced subgraph needs at least one node");
  const auto n = static_cast<NodeId>(g.num_nodes());
  for (NodeId v : nodes) {
    if (v < 0 || v >= n) {
      throw Error(ErrorKind::kBounds, "subgraph node " + std::to_string(v) + " out of range");
    }
  }
  Matrix a = Matrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (nodes[i] != nodes[j] && g.has_edge(nodes[i], nodes[j])) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  const Vector inv_sqrt = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

LocalSubgraph InducedSubgraph(const Graph& g, std::span<const NodeId> nodes) {
  LocalSubgraph out;
  out.adjacency = InducedAdjacency(g, nodes);
  out.features.resize(static_cast<Eigen::Index>(nodes.size()), g.features().cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = g.features().row(nodes[i]);
  }
  return out;
}

GraphReport ValidateGraph(const Graph& g) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kValidation, msg); };
  const auto& rp = g.row_ptr();
  const auto& ci = g.col_idx();
  if (rp.empty() || rp.front() != 0) fail("row pointer must start at 0");
  const std::size_t n = rp.size() - 1;
  if (static_cast<std::size_t>(rp.back()) != ci.size()) fail("row pointer end differs from column count");
  for (std::size_t i = 0; i < n; ++i) {
    if (rp[i + 1] < rp[i]) fail("row pointer not monotone at row " + std::to_string(i));
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (auto k = rp[u]; k < rp[u + 1]; ++k) {
      const NodeId v = ci[k];
      if (v < 0 || static_cast<std::size_t>(v) >= n) fail("column index out of range in row " + std::to_string(u));
      if (static_cast<std::size_t>(v) == u) fail("self-loop stored at node " + std::to_string(u));
      if (k > rp[u] && ci[k - 1] >= v) fail("neighbor list of node " + std::to_string(u) + " not strictly sorted");
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (auto k = rp[u]; k < rp[u + 1]; ++k) {
      if (!g.has_edge(ci[k], static_cast<NodeId>(u))) {
        fail("adjacency not symmetric: (" + std::to_string(u) + "," + std::to_string(ci[k]) +
             ") present without reverse");
      }
    }
  }
  if (static_cast<std::size_t>(g.features().rows()) != n) fail("feature row count differs from n");
  if (!g.features().allFinite()) fail("features contain non-finite values");
  if (!g.labels().empty() && g.labels().size() != n) fail("label vector length differs from n");

  GraphReport r;
  r.num_nodes = n;
  r.num_edges = ci.size() / 2;
  r.feature_dim = g.feature_dim();
  for (std::size_t u = 0; u < n; ++u) {
    if (rp[u + 1] == rp[u]) ++r.isolated_nodes;
  }
  for (AnomalyKind k : g.labels()) {
    if (k == AnomalyKind::kStructural) ++r.structural;
    if (k == AnomalyKind::kContextual) ++r.contextual;
  }
  return r;
}

namespace {

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFile, "cannot open " + path);
  return in;
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kFile, "cannot write " + path);
  return out;
}

[[noreturn]] void ParseFail(const std::string& path, std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::kParse, path + ":" + std::to_string(line) + ": " + msg);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool ParseNumber(std::string_view s, T& out) {
  s = Trim(s);
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is incomplete in older libstdc++; strtod is fine here.
    std::string tmp(s);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size();
  } else {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  }
}

}  // namespace

Graph LoadGraph(const std::string& edge_path, const std::string& feature_path,
                const std::optional<std::string>& label_path) {
  std::vector<std::vector<double>> rows;
  {
    auto in = OpenInput(feature_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (Trim(line).empty()) continue;
      std::vector<double> row;
      std::string_view rest(line);
      while (true) {
        auto comma = rest.find(',');
        double value = 0.0;
        if (!ParseNumber(rest.substr(0, comma), value)) ParseFail(feature_path, lineno, "bad feature value");
        row.push_back(value);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        ParseFail(feature_path, lineno, "expected " + std::to_string(rows.front().size()) + " columns");
      }
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows.front().size();
  Matrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) features(i, j) = rows[i][j];
  }
  rows.clear();

  std::vector<std::pair<NodeId, NodeId>> edges;
  {
    auto in = OpenInput(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::string a, b, extra;
      if (!(ss >> a)) continue;
      if (!(ss >> b) || (ss >> extra)) ParseFail(edge_path, lineno, "expected \"u v\"");
      std::int64_t u = 0, v = 0;
      if (!ParseNumber(a, u) || !ParseNumber(b, v)) ParseFail(edge_path, lineno, "non-integer node id");
      if (u < 0 || v < 0 || u >= static_cast<std::int64_t>(n) || v >= static_cast<std::int64_t>(n)) {
        throw Error(ErrorKind::kBounds, edge_path + ":" + std::to_string(lineno) + ": node index >= n=" +
                                            std::to_string(n));
      }
      if (u == v) ParseFail(edge_path, lineno, "self-loop");
      edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  std::vector<AnomalyKind> labels;
  if (label_path) {
    labels.assign(n, AnomalyKind::kNormal);
    auto in = OpenInput(*label_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto t = Trim(line);
      if (t.empty()) continue;
      if (lineno == 1 && t == "node,kind") continue;
      auto comma = t.find(',');
      if (comma == std::string_view::npos) ParseFail(*label_path, lineno, "expected \"node,kind\"");
      std::int64_t node = 0;
      if (!ParseNumber(t.substr(0, comma), node)) ParseFail(*label_path, lineno, "bad node id");
      if (node < 0 || node >= static_cast<std::int64_t>(n)) {
        throw Error(ErrorKind::kBounds, *label_path + ":" + std::to_string(lineno) + ": label index >= n");
      }
      auto kind = ParseAnomalyKind(std::string(Trim(t.substr(comma + 1))));
      if (!kind) ParseFail(*label_path, lineno, "unknown anomaly kind");
      labels[node] = *kind;
    }
  }
  return Graph(n, edges, std::move(features), std::move(labels));
}

void SaveEdges(const Graph& g, const std::string& path) {
  auto out = OpenOutput(path);
  for (auto [u, v] : g.EdgeList()) out << u << ' ' << v << '\n';
}

void SaveFeatures(const Graph& g, const std::string& path) {
  auto out = OpenOutput(path);
  char buf[32];
  const Matrix& x = g.features();
  std::string line;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) line.push_back(',');
      std::snprintf(buf, sizeof(buf), "%.17g", x(i, j));
      line += buf;
    }
    line.push_back('\n');
    out << line;
  }
}

void SaveLabels(const Graph& g, const std::string& path) {
  auto out = OpenOutput(path);
  out << "node,kind\n";
  for (std::size_t i = 0; i < g.labels().size(); ++i) {
    out << i << ',' << AnomalyKindName(g.labels()[i]) << '\n';
  }
}

}  // namespace mag
