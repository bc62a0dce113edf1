#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rwrkit/graph.hpp"

namespace rwrkit::testing {

inline Graph make_graph(int n, std::vector<Edge> edges) { return Graph::from_edges(n, edges); }

inline Graph path(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph cycle(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, e);
}

inline Graph complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

inline Graph star(int leaves) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

inline Graph two_triangles() { return make_graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}); }

inline Graph random_graph(int n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return make_graph(n, e);
}

inline std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// c (I - (1-c) W)^{-1}, column s = RWR vector from s; returned row-major by source.
inline Eigen::MatrixXd dense_rwr_oracle(const Graph& g, double c) {
  const int n = g.num_nodes();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    if (g.degree(v) == 0) {
      w(v, v) = 1.0;
      continue;
    }
    for (int u : g.neighbors(v)) w(u, v) = 1.0 / g.degree(v);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - (1.0 - c) * w;
  Eigen::MatrixXd sol = c * m.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  return sol.transpose();
}

}  // namespace rwrkit::testing
