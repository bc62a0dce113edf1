#include "rwrkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rwrkit/error.hpp"
#include "rwrkit/format.hpp"
#include "rwrkit/parallel.hpp"
#include "rwrkit/regularizer.hpp"

namespace rwrkit {
namespace {

Architecture architecture_for(Task task) {
  switch (task) {
    case Task::node_cls:
      return Architecture::node2;
    case Task::graph_cls:
      return Architecture::graph2;
    case Task::tri_reg:
      return Architecture::tri3;
  }
  return Architecture::node2;
}

ModelShape shape_for(const TrainConfig& config, int input_dim, int outputs) {
  ModelShape shape = default_shape(architecture_for(config.task), input_dim, outputs);
  if (!config.hidden.empty()) shape.gcn_hidden = config.hidden;
  if (config.mlp_hidden > 0) shape.mlp_hidden = config.mlp_hidden;
  return shape;
}

bool needs_rwr(Injection injection) {
  return injection == Injection::rwr || injection == Injection::rwr_reg || injection == Injection::reg_only;
}

Eigen::MatrixXd row_normalized(Eigen::MatrixXd x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = x.row(i).sum();
    if (s != 0.0) x.row(i) /= s;
  }
  return x;
}

int argmax_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    if (m(row, j) > m(row, best)) best = j;
  }
  return static_cast<int>(best);
}

struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int t = 0;
  std::vector<Eigen::MatrixXd> m, v;

  Adam(double lr_, const GcnModel& model) : lr(lr_) {
    for (const auto& p : model.params) {
      m.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
      v.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
  }

  void step(GcnModel& model, const Gradients& grads) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i].cwiseProduct(grads[i]);
      model.params[i].array() -= lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
    }
  }
};

bool finite_grads(const Gradients& grads) {
  for (const auto& g : grads) {
    if (!g.allFinite()) return false;
  }
  return true;
}

// Shared early-stopping loop. `epoch_step(epoch)` trains one epoch and returns
// its training loss; `val_loss()` evaluates the current model.
template <typename EpochStep, typename ValLoss>
void fit(const TrainConfig& config, GcnModel& model, RunRecord& record, EpochStep&& epoch_step, ValLoss&& val_loss) {
  double best = std::numeric_limits<double>::infinity();
  GcnModel best_model = model;
  int wait = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double train_loss = epoch_step(epoch);
    if (!std::isfinite(train_loss)) {
      record.failed = true;
      record.stop_epoch = epoch;
      return;
    }
    double vl = val_loss();
    record.curve.push_back({train_loss, vl});
    record.stop_epoch = epoch;
    if (vl < best) {
      best = vl;
      best_model = model;
      record.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= config.patience) {
      break;
    }
  }
  model = std::move(best_model);
  record.val_loss = best;
}

// ---- node classification -------------------------------------------------

struct NodeData {
  const Graph* graph = nullptr;
  NormalizedAdjacency adj;
  Eigen::MatrixXd x;
  std::optional<DeltaOperator> delta;
  std::vector<int> labels;
  int classes = 0;
};

NodeData prepare_node_data(const TrainConfig& config, const Graph& graph) {
  if (!graph.labels()) throw ConfigError("node classification needs node labels");
  if (!graph.features()) throw ConfigError("node classification needs node features");
  NodeData data{&graph, NormalizedAdjacency(graph), {}, std::nullopt, *graph.labels(), graph.num_classes()};
  Eigen::MatrixXd x = config.normalize_features ? row_normalized(*graph.features()) : *graph.features();
  std::optional<RwrMatrix> s;
  if (needs_rwr(config.injection)) {
    RwrOptions opts;
    opts.c = config.c;
    opts.threads = config.threads;
    s = rwr_matrix(graph, opts);
  }
  data.x = inject_features(x, graph, s ? &*s : nullptr, config.injection);
  if (uses_regularizer(config.injection)) {
    data.delta = config.top_k ? build_delta(top_k_sparsify(*s, *config.top_k)) : build_delta(*s);
  }
  return data;
}

RunRecord run_node(const TrainConfig& config, const NodeData& data, double lambda, std::uint64_t seed) {
  RunRecord record;
  record.seed = seed;
  SplitSpec spec = config.split;
  spec.seed = seed;
  NodeSplit split = make_split(*data.graph, spec);
  GcnModel model = create_model(shape_for(config, static_cast<int>(data.x.cols()), data.classes), config.dropout, seed);
  Adam adam(config.lr, model);
  const DeltaOperator* delta = data.delta ? &*data.delta : nullptr;

  auto sample_for = [&](const std::vector<int>& nodes, std::uint64_t epoch) {
    Sample s;
    s.adj = &data.adj;
    s.x = &data.x;
    s.delta = delta;
    s.node_labels = &data.labels;
    s.loss_nodes = &nodes;
    s.key = {seed, epoch, 0};
    return s;
  };
  auto epoch_step = [&](int epoch) {
    Sample s = sample_for(split.train, static_cast<std::uint64_t>(epoch));
    LossResult r = total_loss(model, Task::node_cls, {&s, 1}, lambda, config.weight_decay, true);
    if (!std::isfinite(r.loss.total()) || !finite_grads(r.grads)) return std::numeric_limits<double>::quiet_NaN();
    adam.step(model, r.grads);
    return r.loss.total();
  };
  auto val_loss = [&] {
    Sample s = sample_for(split.val, 0);
    return total_loss(model, Task::node_cls, {&s, 1}, 0.0, 0.0, false, false).loss.task;
  };
  fit(config, model, record, epoch_step, val_loss);
  if (record.failed) return record;

  ForwardResult fwd = gcn_forward(model, data.adj, data.x, false);
  auto accuracy = [&](const std::vector<int>& nodes) {
    if (nodes.empty()) return 0.0;
    int hits = 0;
    for (int v : nodes) hits += argmax_row(fwd.output, v) == data.labels[v];
    return static_cast<double>(hits) / static_cast<double>(nodes.size());
  };
  record.metric = accuracy(split.test);
  record.val_metric = accuracy(split.val);
  return record;
}

// ---- graph-level tasks ---------------------------------------------------

struct GraphItem {
  NormalizedAdjacency adj;
  Eigen::MatrixXd x;
  std::optional<DeltaOperator> delta;
  int label = 0;
  double target = 0.0;
};

struct GraphData {
  std::vector<GraphItem> items;
  int outputs = 1;
  int width = 0;
};

GraphData prepare_graph_data(const TrainConfig& config, const GraphSet& set) {
  if (config.task == Task::node_cls) throw ConfigError("graph sets need a graph-level task");
  GraphData data;
  if (config.task == Task::graph_cls) {
    data.outputs = set.num_classes();
    if (data.outputs < 2) throw ConfigError("graph classification needs labelled graphs with >= 2 classes");
  }
  const int pad = set.max_nodes();
  RwrOptions opts;
  opts.c = config.c;
  std::vector<std::optional<GraphItem>> items(set.size());
  parallel_for(static_cast<int>(set.size()), config.threads, [&](int i) {
    const Graph& g = set.graphs[i];
    if (!g.features()) throw ConfigError("graph " + std::to_string(i) + " has no node features");
    if (config.task == Task::graph_cls && !g.graph_label()) {
      throw ConfigError("graph " + std::to_string(i) + " has no class label");
    }
    if (config.task == Task::tri_reg && !g.target()) throw ConfigError("graph " + std::to_string(i) + " has no target");
    std::optional<RwrMatrix> s;
    if (needs_rwr(config.injection)) s = rwr_matrix(g, opts);
    Eigen::MatrixXd x = config.normalize_features ? row_normalized(*g.features()) : *g.features();
    GraphItem item{NormalizedAdjacency(g), inject_features(x, g, s ? &*s : nullptr, config.injection, pad),
                   std::nullopt, g.graph_label().value_or(0), g.target().value_or(0.0)};
    if (uses_regularizer(config.injection)) {
      int k = config.top_k ? std::min(*config.top_k, g.num_nodes()) : 0;
      item.delta = k > 0 ? build_delta(top_k_sparsify(*s, k)) : build_delta(*s);
    }
    items[i] = std::move(item);
  });
  for (auto& item : items) data.items.push_back(std::move(*item));
  if (!data.items.empty()) data.width = static_cast<int>(data.items.front().x.cols());
  for (const auto& item : data.items) {
    if (item.x.cols() != data.width) throw ShapeError("graphs carry node features of different widths");
  }
  return data;
}

struct GraphSplit {
  std::vector<int> train, val, test;
};

std::vector<Sample> graph_samples(const GraphData& data, const std::vector<int>& ids, std::uint64_t seed,
                                  std::uint64_t epoch) {
  std::vector<Sample> out;
  out.reserve(ids.size());
  for (int i : ids) {
    const GraphItem& item = data.items[i];
    Sample s;
    s.adj = &item.adj;
    s.x = &item.x;
    s.delta = item.delta ? &*item.delta : nullptr;
    s.graph_label = item.label;
    s.target = item.target;
    s.key = {seed, epoch, static_cast<std::uint64_t>(i)};
    out.push_back(s);
  }
  return out;
}

RunRecord run_graph(const TrainConfig& config, const GraphData& data, const GraphSplit& split, double lambda,
                    std::uint64_t seed) {
  RunRecord record;
  record.seed = seed;
  if (split.train.empty() || split.val.empty() || split.test.empty()) throw ConfigError("empty train/val/test split");
  GcnModel model = create_model(shape_for(config, data.width, data.outputs), config.dropout, seed);
  Adam adam(config.lr, model);
  const int batch = std::max(1, config.batch_size);
  std::vector<int> order = split.train;

  auto epoch_step = [&](int epoch) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::vector<int> ids(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
      auto samples = graph_samples(data, ids, seed, static_cast<std::uint64_t>(epoch));
      LossResult r = total_loss(model, config.task, samples, lambda, config.weight_decay, true);
      if (!std::isfinite(r.loss.total()) || !finite_grads(r.grads)) return std::numeric_limits<double>::quiet_NaN();
      adam.step(model, r.grads);
      total += r.loss.total() * static_cast<double>(ids.size());
    }
    return total / static_cast<double>(order.size());
  };
  auto val_loss = [&] {
    auto samples = graph_samples(data, split.val, seed, 0);
    return total_loss(model, config.task, samples, 0.0, 0.0, false, false).loss.task;
  };
  fit(config, model, record, epoch_step, val_loss);
  if (record.failed) return record;

  auto metric = [&](const std::vector<int>& ids) {
    double acc = 0.0;
    for (int i : ids) {
      const GraphItem& item = data.items[i];
      ForwardResult fwd = gcn_forward(model, item.adj, item.x, false);
      if (config.task == Task::graph_cls) {
        acc += argmax_row(fwd.output, 0) == item.label ? 1.0 : 0.0;
      } else {
        double err = fwd.output(0, 0) - item.target;
        acc += err * err;
      }
    }
    return acc / static_cast<double>(ids.size());
  };
  record.metric = metric(split.test);
  record.val_metric = metric(split.val);
  return record;
}

// ---- aggregation -----------------------------------------------------------

bool higher_is_better(Task task) { return task != Task::tri_reg; }

void summarize(RunMetrics& metrics) {
  std::vector<double> values;
  metrics.failed = 0;
  for (const auto& r : metrics.runs) {
    if (r.failed) {
      ++metrics.failed;
      metrics.warnings.push_back("run with seed " + std::to_string(r.seed) + " diverged and was excluded");
    } else {
      values.push_back(r.metric);
    }
  }
  if (values.empty()) {
    metrics.mean = metrics.std = metrics.median = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  metrics.mean = mean;
  metrics.std = std::sqrt(var / static_cast<double>(values.size()));
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  metrics.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double mean_val_metric(const RunMetrics& metrics) {
  double total = 0.0;
  int count = 0;
  for (const auto& r : metrics.runs) {
    if (r.failed) continue;
    total += r.val_metric;
    ++count;
  }
  return count ? total / count : std::numeric_limits<double>::quiet_NaN();
}

template <typename RunOne>
RunMetrics run_many(const TrainConfig& config, int count, double lambda, RunOne&& run_one) {
  RunMetrics metrics;
  metrics.metric_name = config.task == Task::tri_reg ? "mse" : "accuracy";
  metrics.lambda = lambda;
  metrics.runs.resize(count);
  parallel_for(count, config.threads, [&](int r) { metrics.runs[r] = run_one(r, lambda); });
  summarize(metrics);
  return metrics;
}

// Runs once per lambda on the grid and keeps the best mean validation metric.
template <typename RunOne>
RunMetrics run_with_lambda_selection(const TrainConfig& config, int count, RunOne&& run_one) {
  if (!uses_regularizer(config.injection)) return run_many(config, count, 0.0, run_one);
  if (config.lambda_grid.empty()) return run_many(config, count, config.lambda, run_one);
  std::optional<RunMetrics> best;
  double best_score = 0.0;
  std::vector<LambdaTrial> trials;
  for (double lambda : config.lambda_grid) {
    RunMetrics m = run_many(config, count, lambda, run_one);
    double score = mean_val_metric(m);
    trials.push_back({lambda, score, m.mean});
    if (std::isnan(score)) continue;
    bool better = !best || (higher_is_better(config.task) ? score > best_score : score < best_score);
    if (better) {
      best = std::move(m);
      best_score = score;
    }
  }
  if (!best) best = run_many(config, count, config.lambda_grid.front(), run_one);
  best->lambda_search = std::move(trials);
  return *best;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Task parse_task(const std::string& s) {
  if (s == "node_cls") return Task::node_cls;
  if (s == "graph_cls") return Task::graph_cls;
  if (s == "tri_reg") return Task::tri_reg;
  throw ConfigError("unknown task \"" + s + "\"");
}

Injection parse_injection(const std::string& s) {
  if (s == "none") return Injection::none;
  if (s == "adjacency") return Injection::adjacency;
  if (s == "rwr") return Injection::rwr;
  if (s == "rwr+reg") return Injection::rwr_reg;
  if (s == "reg_only") return Injection::reg_only;
  throw ConfigError("unknown injection \"" + s + "\"");
}

}  // namespace

bool uses_regularizer(Injection injection) {
  return injection == Injection::rwr_reg || injection == Injection::reg_only;
}

std::string to_string(Task task) {
  switch (task) {
    case Task::node_cls:
      return "node_cls";
    case Task::graph_cls:
      return "graph_cls";
    case Task::tri_reg:
      return "tri_reg";
  }
  return "node_cls";
}

std::string to_string(Injection injection) {
  switch (injection) {
    case Injection::none:
      return "none";
    case Injection::adjacency:
      return "adjacency";
    case Injection::rwr:
      return "rwr";
    case Injection::rwr_reg:
      return "rwr+reg";
    case Injection::reg_only:
      return "reg_only";
  }
  return "none";
}

TrainConfig TrainConfig::defaults_for(Task task) {
  TrainConfig config;
  config.task = task;
  config.lambda_grid = kDefaultLambdaGrid;
  switch (task) {
    case Task::node_cls:
      config.lr = 0.01;
      config.weight_decay = 5e-4;
      config.dropout = 0.5;
      break;
    case Task::graph_cls:
      config.lr = 5e-4;
      config.weight_decay = 0.0;
      config.dropout = 0.1;
      break;
    case Task::tri_reg:
      config.lr = 5e-3;
      config.weight_decay = 0.0;
      config.dropout = 0.1;
      break;
  }
  return config;
}

TrainConfig config_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known = {
      "task", "injection", "lambda", "lambda_grid", "c", "top_k", "lr", "weight_decay", "dropout", "epochs",
      "patience", "seed", "runs", "hidden", "mlp_hidden", "train_per_class", "val_size", "test_size", "folds",
      "batch_size", "normalize_features", "threads"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown train config key \"" + key + "\"");
  }
  try {
    TrainConfig config = TrainConfig::defaults_for(doc.contains("task") ? parse_task(doc["task"].get<std::string>())
                                                                        : Task::node_cls);
    if (doc.contains("injection")) config.injection = parse_injection(doc["injection"].get<std::string>());
    if (doc.contains("lambda")) config.lambda = doc["lambda"].get<double>();
    if (doc.contains("lambda_grid")) config.lambda_grid = doc["lambda_grid"].get<std::vector<double>>();
    if (doc.contains("c")) config.c = doc["c"].get<double>();
    if (doc.contains("top_k") && !doc["top_k"].is_null()) config.top_k = doc["top_k"].get<int>();
    if (doc.contains("lr")) config.lr = doc["lr"].get<double>();
    if (doc.contains("weight_decay")) config.weight_decay = doc["weight_decay"].get<double>();
    if (doc.contains("dropout")) config.dropout = doc["dropout"].get<double>();
    if (doc.contains("epochs")) config.epochs = doc["epochs"].get<int>();
    if (doc.contains("patience")) config.patience = doc["patience"].get<int>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("runs")) config.runs = doc["runs"].get<int>();
    if (doc.contains("hidden")) config.hidden = doc["hidden"].get<std::vector<int>>();
    if (doc.contains("mlp_hidden")) config.mlp_hidden = doc["mlp_hidden"].get<int>();
    if (doc.contains("train_per_class")) config.split.train_per_class = doc["train_per_class"].get<int>();
    if (doc.contains("val_size")) config.split.val_size = doc["val_size"].get<int>();
    if (doc.contains("test_size")) config.split.test_size = doc["test_size"].get<int>();
    if (doc.contains("folds")) config.folds = doc["folds"].get<int>();
    if (doc.contains("batch_size")) config.batch_size = doc["batch_size"].get<int>();
    if (doc.contains("normalize_features")) config.normalize_features = doc["normalize_features"].get<bool>();
    if (doc.contains("threads")) config.threads = doc["threads"].get<int>();
    if (config.lambda < 0.0) throw ConfigError("lambda must be non-negative");
    for (double l : config.lambda_grid) {
      if (l < 0.0) throw ConfigError("lambda grid values must be non-negative");
    }
    if (!(config.c > 0.0 && config.c <= 1.0)) throw ConfigError("c must lie in (0, 1]");
    if (config.runs < 1 || config.epochs < 1 || config.patience < 1) {
      throw ConfigError("runs, epochs and patience must be positive");
    }
    if (config.folds < 2) throw ConfigError("folds must be >= 2");
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
}

nlohmann::ordered_json config_to_json(const TrainConfig& config) {
  nlohmann::ordered_json doc;
  doc["task"] = to_string(config.task);
  doc["injection"] = to_string(config.injection);
  doc["lambda"] = config.lambda;
  doc["lambda_grid"] = config.lambda_grid;
  doc["c"] = config.c;
  doc["top_k"] = config.top_k ? nlohmann::ordered_json(*config.top_k) : nlohmann::ordered_json(nullptr);
  doc["lr"] = config.lr;
  doc["weight_decay"] = config.weight_decay;
  doc["dropout"] = config.dropout;
  doc["epochs"] = config.epochs;
  doc["patience"] = config.patience;
  doc["seed"] = config.seed;
  doc["runs"] = config.runs;
  doc["hidden"] = config.hidden;
  doc["mlp_hidden"] = config.mlp_hidden;
  doc["train_per_class"] = config.split.train_per_class;
  doc["val_size"] = config.split.val_size;
  doc["test_size"] = config.split.test_size;
  doc["folds"] = config.folds;
  doc["batch_size"] = config.batch_size;
  doc["normalize_features"] = config.normalize_features;
  return doc;
}

std::string config_hash(const TrainConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(config).dump())));
  return buf;
}

Eigen::MatrixXd inject_features(const Eigen::MatrixXd& x, const Graph& graph, const RwrMatrix* s, Injection mode,
                                int pad_to) {
  const int n = graph.num_nodes();
  if (x.rows() != n) throw ShapeError("feature rows do not match graph size");
  if (mode == Injection::none || mode == Injection::reg_only) return x;
  const int width = pad_to < 0 ? n : pad_to;
  if (width < n) throw ShapeError("padding width smaller than graph size");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, x.cols() + width);
  out.leftCols(x.cols()) = x;
  if (mode == Injection::adjacency) {
    for (int v = 0; v < n; ++v) {
      for (int u : graph.neighbors(v)) out(v, x.cols() + u) = 1.0;
    }
    return out;
  }
  if (!s) throw ConfigError("RWR injection needs an RWR matrix");
  if (s->size() != n) throw ShapeError("RWR matrix size does not match graph");
  for (int v = 0; v < n; ++v) s->for_each_in_row(v, [&](int u, double w) { out(v, x.cols() + u) = w; });
  return out;
}

RunMetrics train(const TrainConfig& config, const Graph& graph) {
  if (config.task != Task::node_cls) throw ConfigError("a single graph needs task node_cls");
  NodeData data = prepare_node_data(config, graph);
  return run_with_lambda_selection(config, config.runs, [&](int r, double lambda) {
    return run_node(config, data, lambda, config.seed + static_cast<std::uint64_t>(r));
  });
}

RunMetrics train(const TrainConfig& config, const GraphSet& set) {
  GraphData data = prepare_graph_data(config, set);
  return run_with_lambda_selection(config, config.runs, [&](int r, double lambda) {
    std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
    GraphSplit split;
    if (set.split_assignment) {
      for (std::size_t i = 0; i < set.size(); ++i) {
        auto tag = (*set.split_assignment)[i];
        (tag == SplitTag::train ? split.train : tag == SplitTag::val ? split.val : split.test)
            .push_back(static_cast<int>(i));
      }
    } else {
      std::vector<int> ids(set.size());
      std::iota(ids.begin(), ids.end(), 0);
      std::mt19937_64 rng(seed);
      std::shuffle(ids.begin(), ids.end(), rng);
      std::size_t n_val = std::max<std::size_t>(1, set.size() / 10);
      std::size_t n_test = std::max<std::size_t>(1, set.size() / 10);
      split.val.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
      split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
      split.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), ids.end());
    }
    return run_graph(config, data, split, lambda, seed);
  });
}

std::vector<std::vector<int>> kfold_partition(const GraphSet& set, int folds, std::uint64_t seed, bool stratify,
                                              std::vector<std::string>* warnings) {
  if (folds < 2) throw ConfigError("folds must be >= 2");
  std::vector<std::vector<int>> groups;
  if (stratify) {
    groups.resize(std::max(set.num_classes(), 1));
    for (std::size_t i = 0; i < set.size(); ++i) {
      groups[set.graphs[i].graph_label().value_or(0)].push_back(static_cast<int>(i));
    }
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (static_cast<int>(groups[c].size()) < folds) {
        if (warnings) {
          warnings->push_back("class " + std::to_string(c) + " has fewer than " + std::to_string(folds) +
                              " graphs; folds are not stratified");
        }
        groups.clear();
        break;
      }
    }
  }
  if (groups.empty()) {
    groups.assign(1, std::vector<int>(set.size()));
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> members(folds);
  int dealt = 0;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    for (int i : group) members[dealt++ % folds].push_back(i);
  }
  for (auto& m : members) std::sort(m.begin(), m.end());
  return members;
}

RunMetrics evaluate_kfold(const TrainConfig& config, const GraphSet& set) {
  if (config.task == Task::node_cls) throw ConfigError("k-fold evaluation needs a graph-level task");
  const int folds = config.folds;
  if (static_cast<int>(set.size()) < folds) throw ConfigError("fewer graphs than folds");
  GraphData data = prepare_graph_data(config, set);
  std::vector<std::string> warnings;
  auto fold_members = kfold_partition(set, folds, config.seed, config.task == Task::graph_cls, &warnings);

  RunMetrics metrics = run_with_lambda_selection(config, folds, [&](int f, double lambda) {
    GraphSplit split;
    split.test = fold_members[f];
    split.val = fold_members[(f + 1) % folds];
    for (int g = 0; g < folds; ++g) {
      if (g != f && g != (f + 1) % folds) split.train.insert(split.train.end(), fold_members[g].begin(), fold_members[g].end());
    }
    return run_graph(config, data, split, lambda, config.seed + static_cast<std::uint64_t>(f));
  });
  metrics.warnings.insert(metrics.warnings.begin(), warnings.begin(), warnings.end());
  return metrics;
}

nlohmann::ordered_json metrics_to_json(const TrainConfig& config, const RunMetrics& metrics) {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash(config);
  doc["metric"] = metrics.metric_name;
  doc["lambda"] = metrics.lambda;
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : metrics.runs) {
    nlohmann::ordered_json run;
    run["seed"] = r.seed;
    run["metric"] = r.failed ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.metric);
    run["stop_epoch"] = r.stop_epoch;
    if (r.failed) run["failed"] = true;
    runs.push_back(std::move(run));
  }
  doc["runs"] = std::move(runs);
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  doc["mean"] = num(metrics.mean);
  doc["std"] = num(metrics.std);
  doc["failed"] = metrics.failed;
  if (!metrics.lambda_search.empty()) {
    auto search = nlohmann::ordered_json::array();
    for (const auto& t : metrics.lambda_search) {
      search.push_back({{"lambda", t.lambda}, {"val", num(t.mean_val_metric)}, {"test", num(t.mean_test_metric)}});
    }
    doc["lambda_search"] = std::move(search);
  }
  if (!metrics.warnings.empty()) doc["warnings"] = metrics.warnings;
  return doc;
}

std::string curves_csv(const RunMetrics& metrics) {
  std::ostringstream out;
  out << "run,seed,epoch,train_loss,val_loss\n";
  for (std::size_t r = 0; r < metrics.runs.size(); ++r) {
    const auto& run = metrics.runs[r];
    for (std::size_t e = 0; e < run.curve.size(); ++e) {
      out << r << ',' << run.seed << ',' << e << ',' << format_double(run.curve[e].train_loss) << ','
          << format_double(run.curve[e].val_loss) << '\n';
    }
  }
  return out.str();
}

}  // namespace rwrkit
