#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rwrkit/graph.hpp"

namespace rwrkit {

// Per-node labels over the disjoint union (g1 nodes first, then g2), drawn
// from one shared palette.
struct InitialColoring {
  std::vector<std::int64_t> labels;
};

InitialColoring uniform_coloring(const Graph& g1, const Graph& g2);

struct Coloring {
  std::vector<int> colors;  // dense ids 0..num_colors-1 over the union
  int round = 0;
  int num_colors = 0;
};

struct WlReport {
  bool distinguished = false;
  std::optional<int> k_wl;  // first round with differing histograms
  int stable_round = 0;     // first round whose partition equals the next one
  // Per round: color counts of g1 and g2, indexed by color id.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> histograms;
};

// Joint 1-WL refinement on the disjoint union. Round 0 is the (canonicalised)
// initial coloring; round t recolors each node by (own color, sorted multiset
// of neighbor colors), with ids assigned in sorted signature order so the
// result does not depend on node numbering. Refinement continues until the
// partition is stable or max_rounds (default n1 + n2) is reached.
WlReport wl_refine(const Graph& g1, const Graph& g2, const std::optional<InitialColoring>& init = std::nullopt,
                   int max_rounds = -1);

// All colorings produced by the joint refinement, round 0 first.
std::vector<Coloring> refine_colorings(const Graph& g1, const Graph& g2, const InitialColoring& init,
                                       int max_rounds);

// Quantized, descending-sorted k-step RWR row of every node, one shared
// palette for both graphs.
using RowSignature = std::vector<std::int64_t>;
std::vector<RowSignature> rwr_row_signatures(const Graph& g, int k, double c, int quantize);

InitialColoring rwr_coloring(const Graph& g1, const Graph& g2, int k, double c, int quantize);

struct Prop1Report {
  int n1 = 0;
  int n2 = 0;
  std::optional<int> k_wl;               // nullopt: 1-WL equivalent
  std::optional<bool> reps_differ;       // multisets of sorted rows differ
  std::optional<int> rwr_seeded_round;   // distinguishing round from RWR init
  std::optional<bool> matching_differs;  // no relabelling matches the k-step matrices (n <= 6)
  bool pass = true;
  std::vector<std::string> warnings;
};

// Empirical check of the k-step RWR distinguishing property for one pair:
// with k = k_wl from uniform 1-WL, the k-step representations must differ as
// multisets of quantized sorted rows, and 1-WL seeded with rwr_coloring(k)
// must distinguish the pair at round <= 1.
Prop1Report verify_prop1(const Graph& g1, const Graph& g2, double c = 0.15, int quantize = 9);

// Upper-triangle adjacency bitmask minimised over the relabellings allowed by
// the stable 1-WL partition of g alone; equal for isomorphic graphs. n <= 11.
std::uint64_t canonical_code(const Graph& g);

// Backtracking isomorphism test with degree pruning, n <= 8.
bool isomorphic(const Graph& g1, const Graph& g2);

// Non-isomorphic connected graphs on n nodes in ascending canonical order.
// Throws ConfigError for n > 8.
std::vector<Graph> enumerate_connected_graphs(int n);

struct GraphPair {
  std::size_t first;
  std::size_t second;
};

// Unordered pairs (i < j) over the connected graphs on n nodes, either all of
// them or `sample` distinct pairs drawn with `seed`.
struct GraphPairs {
  std::vector<Graph> graphs;
  std::vector<GraphPair> pairs;
};

GraphPairs enumerate_graph_pairs(int n, std::optional<std::size_t> sample = std::nullopt, std::uint64_t seed = 0);

}  // namespace rwrkit
