#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rwrkit {

using Edge = std::pair<int, int>;

// Counts of input edges discarded while building a Graph.
struct EdgeCleanup {
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
};

// Immutable undirected simple graph in CSR form. Neighbor lists are sorted
// ascending, symmetric, and free of self-loops and duplicates. Optional
// payloads: node features X (n rows), node labels, a graph-level class label
// and a real-valued graph target (e.g. a triangle count).
class Graph {
 public:
  Graph() = default;

  // Builds from an undirected edge list. Each pair is taken as an undirected
  // edge; reversed copies, repeats and self-loops are dropped and counted.
  // Throws BoundsError on an endpoint outside [0, n).
  static Graph from_edges(int n, std::span<const Edge> edges, EdgeCleanup* cleanup = nullptr);

  int num_nodes() const { return n_; }
  std::size_t num_edges() const { return indices_.size() / 2; }

  std::span<const int> neighbors(int v) const {
    return {indices_.data() + offsets_[v], indices_.data() + offsets_[v + 1]};
  }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(int u, int v) const;

  std::span<const int> offsets() const { return offsets_; }
  std::span<const int> indices() const { return indices_; }

  // Undirected edges as (u, v) with u < v, sorted lexicographically.
  std::vector<Edge> edge_list() const;

  const std::optional<Eigen::MatrixXd>& features() const { return features_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  std::optional<int> graph_label() const { return graph_label_; }
  std::optional<double> target() const { return target_; }

  // Number of distinct node classes (max label + 1), 0 when unlabeled.
  int num_classes() const;

  Graph with_features(Eigen::MatrixXd features) const;
  Graph with_labels(std::vector<int> labels) const;
  Graph with_graph_label(int label) const;
  Graph with_target(double target) const;

  // Dense 0/1 adjacency matrix.
  Eigen::MatrixXd adjacency_dense() const;

  // Graph with node v renamed to perm[v]. Payloads are permuted consistently.
  Graph permuted(std::span<const int> perm) const;

 private:
  int n_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::optional<Eigen::MatrixXd> features_;
  std::optional<std::vector<int>> labels_;
  std::optional<int> graph_label_;
  std::optional<double> target_;
};

bool operator==(const Graph& a, const Graph& b);

enum class SplitTag { train, val, test };

struct GraphSet {
  std::vector<Graph> graphs;
  std::optional<std::vector<SplitTag>> split_assignment;

  std::size_t size() const { return graphs.size(); }
  // Classes over per-graph labels, 0 if none. Throws ConfigError when labels
  // are present but not dense 0..C-1.
  int num_classes() const;
  int max_nodes() const;
};

// Checks dense 0..C-1 labelling and returns C. Throws ConfigError otherwise.
int validate_dense_labels(std::span<const int> labels);

}  // namespace rwrkit
