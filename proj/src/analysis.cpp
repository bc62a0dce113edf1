#include "rwrkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <sstream>

#include "rwrkit/error.hpp"
#include "rwrkit/format.hpp"
#include "rwrkit/parallel.hpp"

namespace rwrkit {
namespace {

// Diameter of the component containing each node.
std::vector<int> component_diameters(const Graph& graph, std::vector<std::vector<int>>& dist) {
  const int n = graph.num_nodes();
  std::vector<int> component(n, -1);
  std::vector<int> diameter;
  for (int v = 0; v < n; ++v) {
    if (component[v] >= 0) continue;
    int id = static_cast<int>(diameter.size());
    diameter.push_back(0);
    for (int u = 0; u < n; ++u) {
      if (dist[v][u] >= 0) component[u] = id;
    }
  }
  for (int v = 0; v < n; ++v) {
    int ecc = *std::max_element(dist[v].begin(), dist[v].end());
    diameter[component[v]] = std::max(diameter[component[v]], ecc);
  }
  std::vector<int> out(n);
  for (int v = 0; v < n; ++v) out[v] = diameter[component[v]];
  return out;
}

std::vector<std::vector<int>> all_distances(const Graph& graph) {
  std::vector<std::vector<int>> dist(graph.num_nodes());
  for (int v = 0; v < graph.num_nodes(); ++v) dist[v] = bfs_distances(graph, v);
  return dist;
}

std::int64_t pairs(std::int64_t t) { return t * (t - 1) / 2; }

template <typename Key>
std::int64_t tied_pairs(const std::vector<int>& order, Key&& key) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= order.size(); ++i) {
    if (i < order.size() && key(order[i]) == key(order[i - 1])) {
      ++run;
    } else {
      total += pairs(static_cast<std::int64_t>(run));
      run = 1;
    }
  }
  return total;
}

// Sorts `order` by b[] and returns the number of inversions removed.
std::int64_t merge_count(std::vector<int>& order, std::span<const double> b) {
  std::int64_t swaps = 0;
  std::vector<int> buf(order.size());
  for (std::size_t width = 1; width < order.size(); width *= 2) {
    for (std::size_t lo = 0; lo < order.size(); lo += 2 * width) {
      std::size_t mid = std::min(lo + width, order.size());
      std::size_t hi = std::min(lo + 2 * width, order.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (b[order[j]] < b[order[i]]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = order[j++];
        } else {
          buf[k++] = order[i++];
        }
      }
      while (i < mid) buf[k++] = order[i++];
      while (j < hi) buf[k++] = order[j++];
    }
    std::swap(order, buf);
  }
  return swaps;
}

struct Sweeper {
  const TrainConfig& config;
  const Graph* graph = nullptr;
  const GraphSet* set = nullptr;

  RunMetrics run(const TrainConfig& c) const { return graph ? train(c, *graph) : train(c, *set); }

  std::vector<SweepRow> operator()(const std::vector<TrainConfig>& configs, std::vector<SweepRow> rows) const {
    parallel_for(static_cast<int>(configs.size()), config.threads,
                 [&](int i) { rows[i].metrics = run(configs[i]); });
    return rows;
  }
};

std::vector<SweepRow> restart_rows(const TrainConfig& config, const Sweeper& sweeper, std::vector<double> cs) {
  if (cs.empty()) cs = kDefaultRestartGrid;
  std::vector<TrainConfig> configs;
  std::vector<SweepRow> rows;
  TrainConfig base = config;
  base.injection = Injection::none;
  base.threads = 1;
  configs.push_back(base);
  rows.push_back({"baseline", 0.0, {}});
  for (double c : cs) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("restart values must lie in (0, 1]");
    TrainConfig point = config;
    point.c = c;
    point.threads = 1;
    configs.push_back(point);
    rows.push_back({"c", c, {}});
  }
  return sweeper(configs, std::move(rows));
}

std::vector<SweepRow> topk_rows(const TrainConfig& config, const Sweeper& sweeper, int n, std::vector<int> ks) {
  if (!uses_regularizer(config.injection)) throw ConfigError("top-K sweeps need an injection using the regulariser");
  if (ks.empty()) ks = default_topk_grid(n);
  std::vector<TrainConfig> configs;
  std::vector<SweepRow> rows;
  TrainConfig base = config;
  base.injection = Injection::none;
  base.threads = 1;
  configs.push_back(base);
  rows.push_back({"baseline", 0.0, {}});
  for (int k : ks) {
    if (k < 1 || k > n) throw ConfigError("top-K values must lie in [1, " + std::to_string(n) + "]");
    TrainConfig point = config;
    point.top_k = k;
    point.threads = 1;
    configs.push_back(point);
    rows.push_back({"top_k", static_cast<double>(k), {}});
  }
  return sweeper(configs, std::move(rows));
}

}  // namespace

std::vector<int> bfs_distances(const Graph& graph, int source) {
  if (source < 0 || source >= graph.num_nodes()) throw BoundsError("BFS source out of range");
  std::vector<int> dist(graph.num_nodes(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : graph.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

double HopMassProfile::cumulative(int h) const {
  double total = 0.0;
  for (const auto& [d, m] : masses) {
    if (d <= h) total += m;
  }
  return total;
}

HopMassProfile hop_mass_profile(const Graph& graph, const RwrMatrix& s, const HopMassOptions& options) {
  const int n = graph.num_nodes();
  if (s.size() != n) throw ShapeError("RWR matrix size does not match graph");
  auto dist = all_distances(graph);
  auto diameter = component_diameters(graph, dist);
  std::vector<double> sums;
  HopMassProfile profile;
  for (int v = 0; v < n; ++v) {
    if (options.min_diameter >= 0 && diameter[v] <= options.min_diameter) continue;
    ++profile.sources;
    s.for_each_in_row(v, [&](int u, double w) {
      int d = dist[v][u];
      if (d < 0) return;
      if (static_cast<int>(sums.size()) <= d) sums.resize(d + 1, 0.0);
      sums[d] += w;
    });
  }
  for (std::size_t d = 0; d < sums.size(); ++d) {
    double mean = sums[d] / profile.sources;
    if (mean >= options.min_mass) profile.masses.emplace_back(static_cast<int>(d), mean);
  }
  return profile;
}

std::vector<int> drw_sequence(const Graph& graph, const RwrMatrix& s, int v, bool reverse_ties) {
  if (s.size() != graph.num_nodes()) throw ShapeError("RWR matrix size does not match graph");
  auto dist = bfs_distances(graph, v);
  std::vector<int> nodes;
  for (int u = 0; u < graph.num_nodes(); ++u) {
    if (dist[u] >= 0) nodes.push_back(u);
  }
  std::sort(nodes.begin(), nodes.end(), [&](int x, int y) {
    double wx = s.at(v, x), wy = s.at(v, y);
    if (wx != wy) return wx > wy;
    return reverse_ties ? x > y : x < y;
  });
  std::vector<int> out;
  out.reserve(nodes.size());
  for (int u : nodes) out.push_back(dist[u]);
  return out;
}

std::optional<double> kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("tau-b needs sequences of equal length");
  if (a.size() < 2) throw ConfigError("tau-b needs at least two observations");
  const auto n = static_cast<std::int64_t>(a.size());
  std::vector<int> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j]; });
  const std::int64_t n0 = pairs(n);
  const std::int64_t n1 = tied_pairs(order, [&](int i) { return a[i]; });
  const std::int64_t n3 = tied_pairs(order, [&](int i) { return std::pair(a[i], b[i]); });
  const std::int64_t swaps = merge_count(order, b);
  const std::int64_t n2 = tied_pairs(order, [&](int i) { return b[i]; });
  if (n0 == n1 || n0 == n2) return std::nullopt;
  const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  return num / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

KendallSummary kendall_analysis(const Graph& graph, const RwrMatrix& s, bool diameter_filter, int min_diameter) {
  KendallSummary summary;
  summary.diameter_filter = diameter_filter;
  std::vector<int> diameter;
  if (diameter_filter) {
    auto dist = all_distances(graph);
    diameter = component_diameters(graph, dist);
  }
  double total = 0.0, total_rev = 0.0;
  int defined = 0;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (diameter_filter && diameter[v] <= min_diameter) continue;
    ++summary.sources;
    auto tau_for = [&](bool reverse) -> std::optional<double> {
      auto seq = drw_sequence(graph, s, v, reverse);
      if (seq.size() < 2) return std::nullopt;
      std::vector<double> a(seq.begin(), seq.end());
      std::vector<double> sorted = a;
      std::sort(sorted.begin(), sorted.end());
      return kendall_tau_b(a, sorted);
    };
    auto tau = tau_for(false);
    auto tau_rev = tau_for(true);
    if (!tau || !tau_rev) {
      ++summary.undefined;
      continue;
    }
    total += *tau;
    total_rev += *tau_rev;
    ++defined;
  }
  if (defined > 0) {
    summary.mean_tau = total / defined;
    summary.mean_tau_reversed = total_rev / defined;
  } else {
    summary.mean_tau = summary.mean_tau_reversed = std::numeric_limits<double>::quiet_NaN();
  }
  return summary;
}

std::vector<int> default_topk_grid(int n) {
  std::vector<int> ks;
  for (int k : {n / 8, n / 4, n / 2, n}) {
    k = std::max(k, 1);
    if (ks.empty() || ks.back() != k) ks.push_back(k);
  }
  return ks;
}

std::vector<SweepRow> sweep_restart(const TrainConfig& config, const Graph& graph, std::vector<double> cs) {
  return restart_rows(config, Sweeper{config, &graph, nullptr}, std::move(cs));
}

std::vector<SweepRow> sweep_restart(const TrainConfig& config, const GraphSet& set, std::vector<double> cs) {
  return restart_rows(config, Sweeper{config, nullptr, &set}, std::move(cs));
}

std::vector<SweepRow> sweep_topk(const TrainConfig& config, const Graph& graph, std::vector<int> ks) {
  return topk_rows(config, Sweeper{config, &graph, nullptr}, graph.num_nodes(), std::move(ks));
}

std::vector<SweepRow> sweep_topk(const TrainConfig& config, const GraphSet& set, std::vector<int> ks) {
  return topk_rows(config, Sweeper{config, nullptr, &set}, set.max_nodes(), std::move(ks));
}

std::string sweep_csv(const TrainConfig& config, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "param,value,injection,lambda,metric,mean,std,median,failed\n";
  for (const auto& row : rows) {
    Injection injection = row.param == "baseline" ? Injection::none : config.injection;
    out << row.param << ',' << format_double(row.value) << ',' << to_string(injection) << ','
        << format_double(row.metrics.lambda) << ',' << row.metrics.metric_name << ','
        << format_double(row.metrics.mean) << ',' << format_double(row.metrics.std) << ','
        << format_double(row.metrics.median) << ',' << row.metrics.failed << '\n';
  }
  return out.str();
}

}  // namespace rwrkit
