#include "rwrkit/wl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "rwrkit/error.hpp"
#include "rwrkit/rwr.hpp"

namespace rwrkit {
namespace {

// Disjoint union adjacency view: g1 nodes first, g2 nodes offset by n1.
struct UnionView {
  const Graph& g1;
  const Graph& g2;

  int n1() const { return g1.num_nodes(); }
  int size() const { return g1.num_nodes() + g2.num_nodes(); }

  template <typename F>
  void for_each_neighbor(int x, F&& f) const {
    if (x < n1()) {
      for (int v : g1.neighbors(x)) f(v);
    } else {
      for (int v : g2.neighbors(x - n1())) f(v + n1());
    }
  }
};

// Dense ids in ascending key order.
template <typename Key>
std::vector<int> canonical_ids(const std::vector<Key>& keys, int& num_ids) {
  std::vector<Key> distinct = keys;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> ids(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ids[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), keys[i]) - distinct.begin());
  }
  num_ids = static_cast<int>(distinct.size());
  return ids;
}

std::pair<std::vector<int>, std::vector<int>> histograms(const Coloring& col, int n1) {
  std::vector<int> h1(col.num_colors, 0), h2(col.num_colors, 0);
  for (int x = 0; x < static_cast<int>(col.colors.size()); ++x) {
    (x < n1 ? h1 : h2)[col.colors[x]]++;
  }
  return {std::move(h1), std::move(h2)};
}

Coloring refine_once(const UnionView& view, const Coloring& prev) {
  std::vector<std::vector<int>> signatures(view.size());
  for (int x = 0; x < view.size(); ++x) {
    auto& sig = signatures[x];
    view.for_each_neighbor(x, [&](int y) { sig.push_back(prev.colors[y]); });
    std::sort(sig.begin(), sig.end());
    sig.insert(sig.begin(), prev.colors[x]);
  }
  Coloring next;
  next.round = prev.round + 1;
  next.colors = canonical_ids(signatures, next.num_colors);
  return next;
}

bool connected(const Graph& g) {
  if (g.num_nodes() == 0) return true;
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : g.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == g.num_nodes();
}

int pair_bit(int p, int q, int n) { return p * n - p * (p + 1) / 2 + (q - p - 1); }

Graph graph_from_code(std::uint64_t code, int n) {
  std::vector<Edge> edges;
  for (int p = 0; p < n; ++p) {
    for (int q = p + 1; q < n; ++q) {
      if (code >> pair_bit(p, q, n) & 1u) edges.emplace_back(p, q);
    }
  }
  return Graph::from_edges(n, edges);
}

std::int64_t quantize_value(double x, double scale) { return std::llround(x * scale); }

bool near_rounding_boundary(double x, double scale) {
  double scaled = x * scale;
  double frac = scaled - std::floor(scaled);
  return std::abs(frac - 0.5) < 1e-4;
}

std::vector<std::vector<std::int64_t>> quantized_rows(const Graph& g, int k, double c, int quantize) {
  const double scale = std::pow(10.0, quantize);
  auto s = k_step_representation(g, k, c);
  std::vector<std::vector<std::int64_t>> rows(g.num_nodes());
  for (int v = 0; v < g.num_nodes(); ++v) {
    for (double x : s.dense_row(v)) rows[v].push_back(quantize_value(x, scale));
  }
  return rows;
}

bool permutation_equivalent(const std::vector<std::vector<std::int64_t>>& a,
                            const std::vector<std::vector<std::int64_t>>& b) {
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool same = true;
    for (int v = 0; v < n && same; ++v) {
      for (int u = 0; u < n; ++u) {
        if (a[v][u] != b[perm[v]][perm[u]]) {
          same = false;
          break;
        }
      }
    }
    if (same) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

InitialColoring uniform_coloring(const Graph& g1, const Graph& g2) {
  return {std::vector<std::int64_t>(static_cast<std::size_t>(g1.num_nodes() + g2.num_nodes()), 1)};
}

std::vector<Coloring> refine_colorings(const Graph& g1, const Graph& g2, const InitialColoring& init,
                                       int max_rounds) {
  UnionView view{g1, g2};
  if (static_cast<int>(init.labels.size()) != view.size()) {
    throw ShapeError("initial coloring must label every node of both graphs");
  }
  if (max_rounds < 0) max_rounds = view.size();
  std::vector<Coloring> rounds;
  Coloring first;
  first.colors = canonical_ids(init.labels, first.num_colors);
  rounds.push_back(std::move(first));
  for (int t = 1; t <= max_rounds; ++t) {
    Coloring next = refine_once(view, rounds.back());
    bool changed = next.num_colors != rounds.back().num_colors;
    rounds.push_back(std::move(next));
    if (!changed) break;
  }
  return rounds;
}

WlReport wl_refine(const Graph& g1, const Graph& g2, const std::optional<InitialColoring>& init, int max_rounds) {
  auto rounds = refine_colorings(g1, g2, init ? *init : uniform_coloring(g1, g2), max_rounds);
  WlReport report;
  report.stable_round = rounds.back().round;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    report.histograms.push_back(histograms(rounds[t], g1.num_nodes()));
    const auto& [h1, h2] = report.histograms.back();
    if (!report.distinguished && h1 != h2) {
      report.distinguished = true;
      report.k_wl = rounds[t].round;
    }
    // refinement only splits classes, so an unchanged count means an unchanged partition
    if (t + 1 < rounds.size() && rounds[t + 1].num_colors == rounds[t].num_colors) {
      report.stable_round = rounds[t].round;
      break;
    }
  }
  return report;
}

std::vector<RowSignature> rwr_row_signatures(const Graph& g, int k, double c, int quantize) {
  auto rows = quantized_rows(g, k, c, quantize);
  for (auto& row : rows) std::sort(row.begin(), row.end(), std::greater<>());
  return rows;
}

InitialColoring rwr_coloring(const Graph& g1, const Graph& g2, int k, double c, int quantize) {
  auto sig = rwr_row_signatures(g1, k, c, quantize);
  auto sig2 = rwr_row_signatures(g2, k, c, quantize);
  sig.insert(sig.end(), sig2.begin(), sig2.end());
  int num_ids = 0;
  auto ids = canonical_ids(sig, num_ids);
  return {std::vector<std::int64_t>(ids.begin(), ids.end())};
}

Prop1Report verify_prop1(const Graph& g1, const Graph& g2, double c, int quantize) {
  Prop1Report report;
  report.n1 = g1.num_nodes();
  report.n2 = g2.num_nodes();
  auto uniform = wl_refine(g1, g2);
  if (!uniform.distinguished) return report;
  report.k_wl = uniform.k_wl;
  const int k = std::max(1, *uniform.k_wl);
  if (*uniform.k_wl == 0) report.warnings.push_back("graphs differ in size; using k = 1");

  const double scale = std::pow(10.0, quantize);
  for (const Graph* g : {&g1, &g2}) {
    auto s = k_step_representation(*g, k, c);
    for (int v = 0; v < g->num_nodes(); ++v) {
      for (double x : s.dense_row(v)) {
        if (near_rounding_boundary(x, scale)) {
          report.warnings.push_back("k-step entry " + std::to_string(x) + " lies on a quantization boundary");
          break;
        }
      }
    }
  }

  auto rows1 = quantized_rows(g1, k, c, quantize);
  auto rows2 = quantized_rows(g2, k, c, quantize);
  auto sorted_multiset = [](std::vector<std::vector<std::int64_t>> rows) {
    for (auto& r : rows) std::sort(r.begin(), r.end(), std::greater<>());
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  report.reps_differ = sorted_multiset(rows1) != sorted_multiset(rows2);

  auto seeded = wl_refine(g1, g2, rwr_coloring(g1, g2, k, c, quantize));
  if (seeded.distinguished) report.rwr_seeded_round = seeded.k_wl;

  if (report.n1 == report.n2 && report.n1 <= 6) report.matching_differs = !permutation_equivalent(rows1, rows2);

  report.pass = *report.reps_differ && report.rwr_seeded_round && *report.rwr_seeded_round <= 1;
  return report;
}

std::uint64_t canonical_code(const Graph& g) {
  const int n = g.num_nodes();
  if (n > 11) throw ConfigError("canonical code supports at most 11 nodes");
  Graph empty = Graph::from_edges(0, {});
  auto rounds = refine_colorings(g, empty, uniform_coloring(g, empty), -1);
  const auto& colors = rounds.back().colors;
  std::vector<std::vector<int>> cells(rounds.back().num_colors);
  for (int v = 0; v < n; ++v) cells[colors[v]].push_back(v);

  std::vector<int> pos(n);
  std::uint64_t best = ~std::uint64_t{0};
  const auto edges = g.edge_list();
  while (true) {
    int p = 0;
    for (const auto& cell : cells) {
      for (int v : cell) pos[v] = p++;
    }
    std::uint64_t code = 0;
    for (auto [u, v] : edges) {
      int a = std::min(pos[u], pos[v]), b = std::max(pos[u], pos[v]);
      code |= std::uint64_t{1} << pair_bit(a, b, n);
    }
    best = std::min(best, code);
    // odometer over per-cell permutations
    std::size_t c = cells.size();
    while (c > 0 && !std::next_permutation(cells[c - 1].begin(), cells[c - 1].end())) --c;
    if (c == 0) break;
  }
  return n < 2 ? 0 : best;
}

bool isomorphic(const Graph& g1, const Graph& g2) {
  const int n = g1.num_nodes();
  if (n != g2.num_nodes() || g1.num_edges() != g2.num_edges()) return false;
  if (n > 8) throw ConfigError("brute-force isomorphism supports at most 8 nodes");
  std::vector<int> d1(n), d2(n);
  for (int v = 0; v < n; ++v) {
    d1[v] = g1.degree(v);
    d2[v] = g2.degree(v);
  }
  auto s1 = d1, s2 = d2;
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  if (s1 != s2) return false;

  std::vector<int> map(n, -1);
  std::vector<char> used(n, 0);
  auto extend = [&](auto&& self, int v) -> bool {
    if (v == n) return true;
    for (int w = 0; w < n; ++w) {
      if (used[w] || d2[w] != d1[v]) continue;
      bool ok = true;
      for (int u = 0; u < v && ok; ++u) ok = g1.has_edge(u, v) == g2.has_edge(map[u], w);
      if (!ok) continue;
      map[v] = w;
      used[w] = 1;
      if (self(self, v + 1)) return true;
      used[w] = 0;
    }
    return false;
  };
  return extend(extend, 0);
}

std::vector<Graph> enumerate_connected_graphs(int n) {
  if (n < 1) throw ConfigError("graph enumeration needs n >= 1");
  if (n > 8) throw ConfigError("graph enumeration budget exceeded: n <= 8");
  // All graphs on m nodes by canonical code, grown one vertex at a time.
  std::set<std::uint64_t> level{0};
  for (int m = 1; m < n; ++m) {
    std::set<std::uint64_t> next;
    for (auto code : level) {
      Graph base = graph_from_code(code, m);
      auto base_edges = base.edge_list();
      for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        auto edges = base_edges;
        for (int u = 0; u < m; ++u) {
          if (mask >> u & 1u) edges.emplace_back(u, m);
        }
        next.insert(canonical_code(Graph::from_edges(m + 1, edges)));
      }
    }
    level = std::move(next);
  }
  std::vector<Graph> out;
  for (auto code : level) {
    Graph g = graph_from_code(code, n);
    if (connected(g)) out.push_back(std::move(g));
  }
  return out;
}

GraphPairs enumerate_graph_pairs(int n, std::optional<std::size_t> sample, std::uint64_t seed) {
  GraphPairs result;
  result.graphs = enumerate_connected_graphs(n);
  const std::size_t m = result.graphs.size();
  const std::size_t total = m < 2 ? 0 : m * (m - 1) / 2;
  if (!sample || *sample >= total) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) result.pairs.push_back({i, j});
    }
    return result;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < *sample) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    chosen.emplace(std::min(i, j), std::max(i, j));
  }
  for (auto [i, j] : chosen) result.pairs.push_back({i, j});
  return result;
}

}  // namespace rwrkit
