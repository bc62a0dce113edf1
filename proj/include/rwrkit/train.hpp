#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwrkit/gcn.hpp"
#include "rwrkit/generators.hpp"
#include "rwrkit/graph.hpp"
#include "rwrkit/rwr.hpp"

namespace rwrkit {

// none: X. adjacency: [X | A row]. rwr: [X | S row]. rwr_reg: [X | S row]
// plus the regulariser. reg_only: X plus the regulariser.
enum class Injection { none, adjacency, rwr, rwr_reg, reg_only };

bool uses_regularizer(Injection injection);
std::string to_string(Task task);
std::string to_string(Injection injection);

inline const std::vector<double> kDefaultLambdaGrid = {1e-9, 1e-8, 1e-7, 1e-6};

struct TrainConfig {
  Task task = Task::node_cls;
  Injection injection = Injection::none;
  double lambda = 0.0;
  // When non-empty and the injection uses the regulariser, lambda is chosen
  // by mean validation metric over this grid.
  std::vector<double> lambda_grid;
  double c = kDefaultRestart;
  std::optional<int> top_k;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  int epochs = 300;
  int patience = 30;
  std::uint64_t seed = 0;
  int runs = 10;
  std::vector<int> hidden;  // empty: architecture default
  int mlp_hidden = 0;       // 0: architecture default
  SplitSpec split;          // node_cls
  int folds = 10;           // graph tasks
  int batch_size = 32;      // graph tasks
  bool normalize_features = false;
  int threads = 1;

  // Defaults: node_cls lr 0.01, L2 5e-4, dropout 0.5; graph_cls lr 5e-4,
  // dropout 0.1, no L2; tri_reg lr 5e-3, dropout 0.1, no L2.
  static TrainConfig defaults_for(Task task);
};

// Flat JSON mirroring TrainConfig; "task" selects the defaults the other keys
// override. Unknown keys throw ConfigError.
TrainConfig config_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json config_to_json(const TrainConfig& config);
// FNV-1a of the canonical config JSON, 16 hex digits.
std::string config_hash(const TrainConfig& config);

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  double metric = 0.0;      // test accuracy or test MSE
  double val_metric = 0.0;  // at the selected checkpoint
  double val_loss = 0.0;
  int stop_epoch = 0;
  int best_epoch = 0;
  bool failed = false;
  std::vector<EpochRecord> curve;
};

struct LambdaTrial {
  double lambda = 0.0;
  double mean_val_metric = 0.0;
  double mean_test_metric = 0.0;
};

struct RunMetrics {
  std::string metric_name;  // "accuracy" or "mse"
  std::vector<RunRecord> runs;
  double mean = 0.0;
  double std = 0.0;  // population std over successful runs
  double median = 0.0;
  int failed = 0;
  double lambda = 0.0;
  std::vector<LambdaTrial> lambda_search;
  std::vector<std::string> warnings;
};

// Feature matrix with structural columns appended. Graph-set tasks pass
// pad_to = max node count so every graph's rows share one width.
Eigen::MatrixXd inject_features(const Eigen::MatrixXd& x, const Graph& graph, const RwrMatrix* s, Injection mode,
                                int pad_to = -1);

// Independent seeded runs (seed, seed+1, ...) on a labelled graph: random
// split per run, Adam, early stopping on validation loss, test accuracy from
// the best-validation checkpoint.
RunMetrics train(const TrainConfig& config, const Graph& graph);

// Graph-level tasks. Uses the set's split tags when present, otherwise a
// random 80/10/10 split per run.
RunMetrics train(const TrainConfig& config, const GraphSet& set);

// Fold membership for k-fold evaluation. Stratified by graph label when
// `stratify` is set and every class has at least `folds` graphs; otherwise a
// warning is appended and the split is unstratified.
std::vector<std::vector<int>> kfold_partition(const GraphSet& set, int folds, std::uint64_t seed, bool stratify,
                                              std::vector<std::string>* warnings = nullptr);

// Stratified (graph_cls) k-fold cross validation: fold f is the test set,
// fold f+1 the validation set, the rest training.
RunMetrics evaluate_kfold(const TrainConfig& config, const GraphSet& set);

nlohmann::ordered_json metrics_to_json(const TrainConfig& config, const RunMetrics& metrics);
// "run,seed,epoch,train_loss,val_loss"
std::string curves_csv(const RunMetrics& metrics);

}  // namespace rwrkit
