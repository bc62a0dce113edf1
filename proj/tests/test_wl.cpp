#include <doctest.h>

#include <algorithm>
#include <set>

#include "rwrkit/error.hpp"
#include "rwrkit/wl.hpp"
#include "support.hpp"

using namespace rwrkit;
using namespace rwrkit::testing;

namespace {

bool connected(const Graph& g) {
  std::vector<int> seen(g.num_nodes(), 0), stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : g.neighbors(v))
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
  }
  return count == g.num_nodes();
}

// Every labelled graph on n nodes, filtered to connected ones and deduplicated
// with the backtracking isomorphism test.
std::size_t brute_force_count(int n) {
  std::vector<Edge> slots;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
  std::vector<Graph> reps;
  for (std::uint64_t mask = 0; mask < (1ULL << slots.size()); ++mask) {
    std::vector<Edge> e;
    for (std::size_t b = 0; b < slots.size(); ++b)
      if (mask >> b & 1) e.push_back(slots[b]);
    Graph g = make_graph(n, e);
    if (!connected(g)) continue;
    if (std::none_of(reps.begin(), reps.end(), [&](const Graph& r) { return isomorphic(r, g); })) reps.push_back(g);
  }
  return reps.size();
}

std::vector<std::vector<int>> sorted_hist(const WlReport& r, bool first) {
  std::vector<std::vector<int>> out;
  for (const auto& [a, b] : r.histograms) {
    auto h = first ? a : b;
    out.push_back(h);
  }
  return out;
}

}  // namespace

TEST_SUITE("wl") {

TEST_CASE("uniform refinement examples") {
  auto p4_star = wl_refine(path(4), star(3));
  CHECK(p4_star.distinguished);
  CHECK(p4_star.k_wl == 1);

  auto regular = wl_refine(cycle(6), two_triangles());
  CHECK(!regular.distinguished);
  CHECK(!regular.k_wl);

  Graph g = random_graph(7, 0.4, 1);
  auto self = wl_refine(g, g);
  CHECK(!self.distinguished);
  for (const auto& [a, b] : self.histograms) CHECK(a == b);
}

TEST_CASE("refinement only splits classes") {
  Graph g1 = random_graph(9, 0.3, 4), g2 = random_graph(9, 0.3, 5);
  auto rounds = refine_colorings(g1, g2, uniform_coloring(g1, g2), -1);
  for (std::size_t t = 1; t < rounds.size(); ++t) {
    const auto& prev = rounds[t - 1].colors;
    const auto& cur = rounds[t].colors;
    for (std::size_t u = 0; u < cur.size(); ++u)
      for (std::size_t v = 0; v < cur.size(); ++v)
        if (cur[u] == cur[v]) CHECK(prev[u] == prev[v]);
    CHECK(rounds[t].num_colors >= rounds[t - 1].num_colors);
  }
}

TEST_CASE("histograms are invariant under relabelling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g1 = random_graph(8, 0.35, seed), g2 = random_graph(8, 0.35, seed + 100);
    Graph p1 = g1.permuted(random_permutation(8, seed + 7));
    auto a = wl_refine(g1, g2);
    auto b = wl_refine(p1, g2);
    CHECK(a.k_wl == b.k_wl);
    CHECK(sorted_hist(a, true) == sorted_hist(b, true));
    CHECK(sorted_hist(a, false) == sorted_hist(b, false));
  }
}

TEST_CASE("RWR coloring") {
  Graph k3 = complete(3);
  auto k3_colors = rwr_coloring(k3, k3, 2, 0.15, 9).labels;
  CHECK(std::all_of(k3_colors.begin(), k3_colors.end(), [&](auto c) { return c == k3_colors[0]; }));

  Graph p3 = path(3);
  auto p3_colors = rwr_coloring(p3, p3, 1, 0.0, 9).labels;
  CHECK(p3_colors[0] == p3_colors[2]);
  CHECK(p3_colors[0] != p3_colors[1]);

  Graph g = random_graph(7, 0.4, 9);
  Graph p = g.permuted(random_permutation(7, 3));
  for (int k = 1; k <= 3; ++k) {
    auto sig_g = rwr_row_signatures(g, k, 0.15, 9);
    auto sig_p = rwr_row_signatures(p, k, 0.15, 9);
    std::sort(sig_g.begin(), sig_g.end());
    std::sort(sig_p.begin(), sig_p.end());
    CHECK(sig_g == sig_p);
  }
}

TEST_CASE("k-step distinguishing check on single pairs") {
  auto r = verify_prop1(path(4), star(3));
  CHECK(r.k_wl == 1);
  CHECK(r.reps_differ == true);
  REQUIRE(r.rwr_seeded_round);
  CHECK(*r.rwr_seeded_round <= 1);
  CHECK(r.matching_differs == true);
  CHECK(r.pass);

  auto eq = verify_prop1(cycle(6), two_triangles());
  CHECK(!eq.k_wl);
  CHECK(!eq.reps_differ);
  CHECK(eq.pass);

  auto sizes = verify_prop1(path(3), path(4));
  CHECK(sizes.k_wl == 0);
  CHECK(sizes.pass);
}

TEST_CASE("connected graph enumeration") {
  CHECK(enumerate_connected_graphs(1).size() == 1);
  CHECK(enumerate_connected_graphs(3).size() == 2);
  CHECK(enumerate_connected_graphs(4).size() == 6);
  CHECK(enumerate_connected_graphs(5).size() == 21);
  CHECK(enumerate_connected_graphs(6).size() == 112);
  for (int n = 2; n <= 5; ++n) CHECK(enumerate_connected_graphs(n).size() == brute_force_count(n));
  CHECK_THROWS_AS(enumerate_connected_graphs(9), ConfigError);

  auto six = enumerate_connected_graphs(6);
  for (std::size_t i = 0; i < six.size(); ++i)
    for (std::size_t j = i + 1; j < six.size(); ++j) CHECK(!isomorphic(six[i], six[j]));
}

TEST_CASE("graph pairs") {
  auto p3 = enumerate_graph_pairs(3);
  CHECK(p3.pairs.size() == 1);
  auto p4 = enumerate_graph_pairs(4);
  CHECK(p4.pairs.size() == 15);
  for (const auto& p : p4.pairs) CHECK(p.first < p.second);

  auto sample = enumerate_graph_pairs(5, 20, 3);
  CHECK(sample.pairs.size() == 20);
  std::set<std::pair<std::size_t, std::size_t>> distinct;
  for (const auto& p : sample.pairs) distinct.emplace(p.first, p.second);
  CHECK(distinct.size() == 20);
  auto again = enumerate_graph_pairs(5, 20, 3);
  for (std::size_t i = 0; i < 20; ++i) CHECK(again.pairs[i].first == sample.pairs[i].first);
}

TEST_CASE("canonical codes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = random_graph(8, 0.4, seed);
    Graph p = g.permuted(random_permutation(8, seed));
    CHECK(canonical_code(g) == canonical_code(p));
    CHECK(isomorphic(g, p));
  }
  CHECK(canonical_code(path(4)) != canonical_code(star(3)));
}

}
