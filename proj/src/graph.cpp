#include "rwrkit/graph.hpp"

#include <algorithm>
#include <string>

#include "rwrkit/error.hpp"

namespace rwrkit {

Graph Graph::from_edges(int n, std::span<const Edge> edges, EdgeCleanup* cleanup) {
  if (n < 0) throw ConfigError("node count must be non-negative");
  EdgeCleanup stats;
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw BoundsError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") outside node range [0, " + std::to_string(n) + ")");
    }
    if (u == v) {
      ++stats.self_loops;
      continue;
    }
    canon.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(canon.begin(), canon.end());
  auto last = std::unique(canon.begin(), canon.end());
  stats.duplicates = static_cast<std::size_t>(canon.end() - last);
  canon.erase(last, canon.end());

  Graph g;
  g.n_ = n;
  std::vector<int> deg(n, 0);
  for (auto [u, v] : canon) {
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.indices_.resize(canon.size() * 2);
  std::vector<int> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : canon) {
    g.indices_[cursor[u]++] = v;
    g.indices_[cursor[v]++] = u;
  }
  for (int v = 0; v < n; ++v) {
    std::sort(g.indices_.begin() + g.offsets_[v], g.indices_.begin() + g.offsets_[v + 1]);
  }
  if (cleanup) *cleanup = stats;
  return g;
}

bool Graph::has_edge(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (int u = 0; u < n_; ++u) {
    for (int v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

int Graph::num_classes() const {
  if (!labels_) return 0;
  int c = 0;
  for (int l : *labels_) c = std::max(c, l + 1);
  return c;
}

Graph Graph::with_features(Eigen::MatrixXd features) const {
  if (features.rows() != n_) {
    throw ShapeError("feature matrix has " + std::to_string(features.rows()) + " rows, graph has " +
                     std::to_string(n_) + " nodes");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_labels(std::vector<int> labels) const {
  if (static_cast<int>(labels.size()) != n_) {
    throw ShapeError("label vector has " + std::to_string(labels.size()) + " entries, graph has " +
                     std::to_string(n_) + " nodes");
  }
  validate_dense_labels(labels);
  Graph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

Graph Graph::with_graph_label(int label) const {
  if (label < 0) throw ConfigError("graph label must be non-negative");
  Graph g = *this;
  g.graph_label_ = label;
  return g;
}

Graph Graph::with_target(double target) const {
  Graph g = *this;
  g.target_ = target;
  return g;
}

Eigen::MatrixXd Graph::adjacency_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (int u = 0; u < n_; ++u) {
    for (int v : neighbors(u)) a(u, v) = 1.0;
  }
  return a;
}

Graph Graph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw ShapeError("permutation size mismatch");
  std::vector<Edge> edges;
  for (auto [u, v] : edge_list()) edges.emplace_back(perm[u], perm[v]);
  Graph g = from_edges(n_, edges);
  if (features_) {
    Eigen::MatrixXd x(features_->rows(), features_->cols());
    for (int v = 0; v < n_; ++v) x.row(perm[v]) = features_->row(v);
    g.features_ = std::move(x);
  }
  if (labels_) {
    std::vector<int> l(n_);
    for (int v = 0; v < n_; ++v) l[perm[v]] = (*labels_)[v];
    g.labels_ = std::move(l);
  }
  g.graph_label_ = graph_label_;
  g.target_ = target_;
  return g;
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.num_nodes() != b.num_nodes()) return false;
  if (!std::ranges::equal(a.offsets(), b.offsets()) || !std::ranges::equal(a.indices(), b.indices())) {
    return false;
  }
  if (a.features().has_value() != b.features().has_value()) return false;
  if (a.features() && *a.features() != *b.features()) return false;
  return a.labels() == b.labels() && a.graph_label() == b.graph_label() && a.target() == b.target();
}

int GraphSet::num_classes() const {
  std::vector<int> labels;
  for (const auto& g : graphs) {
    if (g.graph_label()) labels.push_back(*g.graph_label());
  }
  if (labels.empty()) return 0;
  return validate_dense_labels(labels);
}

int GraphSet::max_nodes() const {
  int m = 0;
  for (const auto& g : graphs) m = std::max(m, g.num_nodes());
  return m;
}

int validate_dense_labels(std::span<const int> labels) {
  // Negative entries mark unlabeled nodes.
  std::vector<int> seen;
  for (int l : labels) {
    if (l < 0) continue;
    if (l >= static_cast<int>(seen.size())) seen.resize(l + 1, 0);
    seen[l] = 1;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw ConfigError("class labels must be dense 0..C-1; class " + std::to_string(c) + " is missing");
    }
  }
  return static_cast<int>(seen.size());
}

}  // namespace rwrkit
