#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rwrkit/graph.hpp"

namespace rwrkit {

struct SbmParams {
  int blocks = 2;
  int nodes_per_block = 200;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 2;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

// Planted-partition stochastic block model. Node v belongs to block
// v / nodes_per_block and carries that block as its label. Features are the
// block indicator plus i.i.d. Gaussian noise of scale `noise`. Deterministic
// per seed. Throws ConfigError unless 0 <= p_out < p_in <= 1 and
// feature_dim >= blocks.
Graph generate_sbm(const SbmParams& params);

struct TriangleSetParams {
  int count = 100;
  int n_min = 4;
  int n_max = 25;
  double edge_prob = 0.3;
  std::uint64_t seed = 0;
  // One-hot degree width is max_degree_bucket + 1; < 0 means n_max - 1.
  int max_degree_bucket = -1;
};

// Erdos-Renyi graphs of uniform size in [n_min, n_max] with the triangle count
// as graph target and one-hot degree node features.
GraphSet generate_triangle_graphs(const TriangleSetParams& params);

std::int64_t count_triangles(const Graph& graph);

struct SplitSpec {
  int train_per_class = 20;
  int val_size = 500;
  int test_size = 1000;
  std::uint64_t seed = 0;
};

struct NodeSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Samples train_per_class labelled nodes from every class, then val_size and
// test_size nodes from the remaining labelled pool. Sets are sorted and
// pairwise disjoint. Throws ConfigError naming the first short class, or when
// the pool cannot cover val + test.
NodeSplit make_split(const Graph& graph, const SplitSpec& spec);

}  // namespace rwrkit
