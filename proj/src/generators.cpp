#include "rwrkit/generators.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "rwrkit/error.hpp"
#include "rwrkit/graph_io.hpp"

namespace rwrkit {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

Graph generate_sbm(const SbmParams& params) {
  check_probability(params.p_in, "p_in");
  check_probability(params.p_out, "p_out");
  if (!(params.p_out < params.p_in)) throw ConfigError("SBM requires p_out < p_in");
  if (params.blocks < 1 || params.nodes_per_block < 1) throw ConfigError("SBM needs at least one node per block");
  if (params.feature_dim < params.blocks) throw ConfigError("SBM feature_dim must be >= blocks");
  if (params.noise < 0.0) throw ConfigError("SBM noise must be non-negative");

  const int n = params.blocks * params.nodes_per_block;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      double p = (u / params.nodes_per_block == v / params.nodes_per_block) ? params.p_in : params.p_out;
      if (unit(rng) < p) edges.emplace_back(u, v);
    }
  }
  std::vector<int> labels(n);
  Eigen::MatrixXd x(n, params.feature_dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int v = 0; v < n; ++v) {
    labels[v] = v / params.nodes_per_block;
    for (int j = 0; j < params.feature_dim; ++j) {
      x(v, j) = (j == labels[v] ? 1.0 : 0.0) + params.noise * gauss(rng);
    }
  }
  return Graph::from_edges(n, edges).with_features(std::move(x)).with_labels(std::move(labels));
}

GraphSet generate_triangle_graphs(const TriangleSetParams& params) {
  if (params.n_min < 3 || params.n_min > params.n_max) throw ConfigError("triangle graphs need 3 <= n_min <= n_max");
  if (params.count < 0) throw ConfigError("graph count must be non-negative");
  check_probability(params.edge_prob, "edge_prob");
  const int bucket = params.max_degree_bucket < 0 ? params.n_max - 1 : params.max_degree_bucket;

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<int> size(params.n_min, params.n_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GraphSet set;
  set.graphs.reserve(params.count);
  for (int i = 0; i < params.count; ++i) {
    int n = size(rng);
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (unit(rng) < params.edge_prob) edges.emplace_back(u, v);
      }
    }
    Graph g = Graph::from_edges(n, edges);
    auto triangles = static_cast<double>(count_triangles(g));
    set.graphs.push_back(g.with_features(degree_one_hot(g, bucket)).with_target(triangles));
  }
  return set;
}

std::int64_t count_triangles(const Graph& graph) {
  std::int64_t total = 0;
  for (int u = 0; u < graph.num_nodes(); ++u) {
    auto nu = graph.neighbors(u);
    for (int v : nu) {
      if (v <= u) continue;
      auto nv = graph.neighbors(v);
      // count w > v in N(u) ∩ N(v)
      auto a = std::upper_bound(nu.begin(), nu.end(), v);
      auto b = std::upper_bound(nv.begin(), nv.end(), v);
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++total;
          ++a;
          ++b;
        }
      }
    }
  }
  return total;
}

NodeSplit make_split(const Graph& graph, const SplitSpec& spec) {
  if (!graph.labels()) throw ConfigError("split requires node labels");
  if (spec.train_per_class < 0 || spec.val_size < 0 || spec.test_size < 0) {
    throw ConfigError("split sizes must be non-negative");
  }
  const auto& labels = *graph.labels();
  const int classes = graph.num_classes();
  std::vector<std::vector<int>> by_class(classes);
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (labels[v] >= 0) by_class[labels[v]].push_back(v);
  }
  std::mt19937_64 rng(spec.seed);
  NodeSplit split;
  std::vector<int> pool;
  for (int c = 0; c < classes; ++c) {
    auto& members = by_class[c];
    if (static_cast<int>(members.size()) < spec.train_per_class) {
      throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                        " labelled nodes, need " + std::to_string(spec.train_per_class) + " for training");
    }
    std::shuffle(members.begin(), members.end(), rng);
    split.train.insert(split.train.end(), members.begin(), members.begin() + spec.train_per_class);
    pool.insert(pool.end(), members.begin() + spec.train_per_class, members.end());
  }
  std::sort(pool.begin(), pool.end());
  if (static_cast<int>(pool.size()) < spec.val_size + spec.test_size) {
    throw ConfigError("only " + std::to_string(pool.size()) + " labelled nodes left for validation/test, need " +
                      std::to_string(spec.val_size + spec.test_size));
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  split.val.assign(pool.begin(), pool.begin() + spec.val_size);
  split.test.assign(pool.begin() + spec.val_size, pool.begin() + spec.val_size + spec.test_size);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace rwrkit
