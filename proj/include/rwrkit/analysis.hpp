#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rwrkit/graph.hpp"
#include "rwrkit/rwr.hpp"
#include "rwrkit/train.hpp"

namespace rwrkit {

// Unweighted shortest-path distances from `source`; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Graph& graph, int source);

struct HopMassOptions {
  double min_mass = 0.001;
  // Sources in components with diameter <= min_diameter are skipped; a
  // negative value disables the filter.
  int min_diameter = 4;
};

struct HopMassProfile {
  std::vector<std::pair<int, double>> masses;  // (distance, mean mass), ascending distance
  int sources = 0;

  // Sum of the reported masses at distances <= h.
  double cumulative(int h) const;
};

HopMassProfile hop_mass_profile(const Graph& graph, const RwrMatrix& s, const HopMassOptions& options = {});

// Distances from v to nodes ordered by decreasing RWR weight. Ties go to the
// lower node index, or the higher one when reverse_ties is set. Unreachable
// nodes are left out.
std::vector<int> drw_sequence(const Graph& graph, const RwrMatrix& s, int v, bool reverse_ties = false);

// Tau-b with tie correction in O(n log n). nullopt when either sequence is
// constant, where the statistic is undefined.
std::optional<double> kendall_tau_b(std::span<const double> a, std::span<const double> b);

struct KendallSummary {
  bool diameter_filter = false;
  int sources = 0;
  int undefined = 0;             // sources whose drw sequence is constant
  double mean_tau = 0.0;         // lower-index tie order
  double mean_tau_reversed = 0.0;
};

// Average tau-b between each source's drw sequence and its sorted self.
KendallSummary kendall_analysis(const Graph& graph, const RwrMatrix& s, bool diameter_filter, int min_diameter = 4);

inline const std::vector<double> kDefaultRestartGrid = {0.05, 0.15, 0.3, 0.5, 0.7, 0.9};

struct SweepRow {
  std::string param;  // "baseline", "c" or "top_k"
  double value = 0.0;
  RunMetrics metrics;
};

// One training per grid point plus a leading baseline row (no injection).
// Grid points run in parallel on config.threads workers.
std::vector<SweepRow> sweep_restart(const TrainConfig& config, const Graph& graph, std::vector<double> cs = {});
std::vector<SweepRow> sweep_restart(const TrainConfig& config, const GraphSet& set, std::vector<double> cs = {});

// Default grid {n/8, n/4, n/2, n}, n = node count (largest graph for sets).
std::vector<int> default_topk_grid(int n);
std::vector<SweepRow> sweep_topk(const TrainConfig& config, const Graph& graph, std::vector<int> ks = {});
std::vector<SweepRow> sweep_topk(const TrainConfig& config, const GraphSet& set, std::vector<int> ks = {});

// "param,value,injection,lambda,metric,mean,std,median,failed"
std::string sweep_csv(const TrainConfig& config, const std::vector<SweepRow>& rows);

}  // namespace rwrkit
