#include <doctest.h>

#include <cmath>
#include <set>

#include "rwrkit/error.hpp"
#include "rwrkit/generators.hpp"
#include "rwrkit/train.hpp"
#include "support.hpp"

using namespace rwrkit;
using namespace rwrkit::testing;

namespace {

Graph small_sbm(std::uint64_t seed = 3, double noise = 2.0) {
  SbmParams p;
  p.nodes_per_block = 60;
  p.p_in = 0.15;
  p.p_out = 0.02;
  p.noise = noise;
  p.seed = seed;
  return generate_sbm(p);
}

TrainConfig quick_node_config() {
  TrainConfig c = TrainConfig::defaults_for(Task::node_cls);
  c.runs = 3;
  c.epochs = 40;
  c.split = {10, 30, 60, 0};
  return c;
}

GraphSet labelled_set(int count, std::uint64_t seed) {
  TriangleSetParams p;
  p.count = count;
  p.n_min = 4;
  p.n_max = 10;
  p.seed = seed;
  GraphSet set = generate_triangle_graphs(p);
  for (auto& g : set.graphs) g = g.with_graph_label(*g.target() > 2 ? 1 : 0);
  return set;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("feature injection") {
  Graph p3 = path(3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 1, 7.0);
  CHECK(inject_features(x, p3, nullptr, Injection::none) == x);
  CHECK(inject_features(x, p3, nullptr, Injection::reg_only) == x);

  Eigen::MatrixXd adj = inject_features(x, p3, nullptr, Injection::adjacency);
  CHECK(adj.cols() == 4);
  CHECK(adj.row(1).tail(3) == Eigen::RowVector3d(1, 0, 1));

  CHECK_THROWS_AS(inject_features(x, p3, nullptr, Injection::rwr), ConfigError);
  RwrMatrix s = rwr_matrix(p3);
  Eigen::MatrixXd padded = inject_features(x, p3, &s, Injection::rwr, 5);
  CHECK(padded.cols() == 6);
  CHECK(padded(0, 2) == s.at(0, 1));
  CHECK(padded.col(4).isZero());
  CHECK(padded.col(5).isZero());

  RwrOptions one;
  one.c = 1.0;
  RwrMatrix id = rwr_matrix(p3, one);
  CHECK(inject_features(x, p3, &id, Injection::rwr).rightCols(3) == Eigen::Matrix3d::Identity());
}

TEST_CASE("config defaults and JSON") {
  auto node = TrainConfig::defaults_for(Task::node_cls);
  CHECK(node.lr == 0.01);
  CHECK(node.weight_decay == 5e-4);
  CHECK(node.dropout == 0.5);
  CHECK(node.epochs == 300);
  CHECK(node.patience == 30);
  CHECK(node.c == 0.15);
  CHECK(node.lambda_grid == kDefaultLambdaGrid);
  auto graph = TrainConfig::defaults_for(Task::graph_cls);
  CHECK(graph.lr == 5e-4);
  CHECK(graph.dropout == 0.1);
  CHECK(TrainConfig::defaults_for(Task::tri_reg).lr == 5e-3);

  nlohmann::ordered_json doc = {{"task", "tri_reg"}, {"injection", "rwr+reg"}, {"top_k", 4}, {"hidden", {8, 8, 8}}};
  TrainConfig c = config_from_json(doc);
  CHECK(c.task == Task::tri_reg);
  CHECK(c.injection == Injection::rwr_reg);
  CHECK(c.lr == 5e-3);
  CHECK(c.top_k == 4);
  TrainConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.lr = 0.1;
  CHECK(config_hash(back) != config_hash(c));

  CHECK_THROWS_AS(config_from_json({{"learning_rate", 0.1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"task", "link_pred"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"lambda", -1.0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"lr", "fast"}}), ConfigError);
}

TEST_CASE("node training is deterministic and sane") {
  Graph g = small_sbm();
  TrainConfig c = quick_node_config();
  RunMetrics a = train(c, g);
  RunMetrics b = train(c, g);
  REQUIRE(a.runs.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(a.runs[r].metric == b.runs[r].metric);
    CHECK(a.runs[r].seed == r);
    CHECK(a.runs[r].curve.size() == b.runs[r].curve.size());
  }
  CHECK(a.mean > 0.7);
  CHECK(a.metric_name == "accuracy");

  c.threads = 3;
  RunMetrics threaded = train(c, g);
  for (std::size_t r = 0; r < 3; ++r) CHECK(threaded.runs[r].metric == a.runs[r].metric);

  double var = 0.0;
  for (const auto& r : a.runs) var += (r.metric - a.mean) * (r.metric - a.mean);
  CHECK(a.std == doctest::Approx(std::sqrt(var / 3)));
}

TEST_CASE("every injection mode trains") {
  Graph g = small_sbm(5);
  TrainConfig c = quick_node_config();
  c.runs = 2;
  c.epochs = 15;
  for (auto mode : {Injection::adjacency, Injection::rwr, Injection::rwr_reg, Injection::reg_only}) {
    c.injection = mode;
    RunMetrics m = train(c, g);
    CHECK(m.failed == 0);
    CHECK(m.mean > 0.5);
    if (uses_regularizer(mode)) {
      CHECK(m.lambda_search.size() == kDefaultLambdaGrid.size());
    } else {
      CHECK(m.lambda == 0.0);
    }
  }
  c.injection = Injection::rwr;
  c.c = 1.0;
  CHECK(train(c, g).failed == 0);
}

TEST_CASE("lambda selection follows validation") {
  Graph g = small_sbm(6);
  TrainConfig c = quick_node_config();
  c.injection = Injection::reg_only;
  c.lambda_grid = {1e-6, 10.0};
  RunMetrics m = train(c, g);
  REQUIRE(m.lambda_search.size() == 2);
  const auto& best = m.lambda_search[0].mean_val_metric >= m.lambda_search[1].mean_val_metric ? m.lambda_search[0]
                                                                                                : m.lambda_search[1];
  CHECK(m.lambda == best.lambda);
  CHECK(m.mean == best.mean_test_metric);

  c.lambda_grid.clear();
  c.lambda = 1e-7;
  CHECK(train(c, g).lambda == 1e-7);
}

TEST_CASE("early stopping and checkpoints") {
  Graph g = small_sbm(7);
  TrainConfig c = quick_node_config();
  c.epochs = 200;
  c.patience = 5;
  RunMetrics m = train(c, g);
  for (const auto& r : m.runs) {
    CHECK(r.stop_epoch < 199);
    CHECK(r.stop_epoch - r.best_epoch == 5);
    double best = 1e300;
    for (const auto& e : r.curve) best = std::min(best, e.val_loss);
    CHECK(r.val_loss == best);
  }
}

TEST_CASE("training loss decreases early on without dropout") {
  Graph g = small_sbm(8);
  TrainConfig c = quick_node_config();
  c.dropout = 0.0;
  c.lr = 1e-3;
  c.epochs = 10;
  c.runs = 5;
  RunMetrics m = train(c, g);
  int monotone = 0;
  for (const auto& r : m.runs) {
    bool ok = true;
    for (std::size_t e = 1; e < r.curve.size(); ++e) ok &= r.curve[e].train_loss <= r.curve[e - 1].train_loss;
    monotone += ok;
  }
  CHECK(monotone >= 3);
}

TEST_CASE("diverging runs are counted, not hidden") {
  Graph g = small_sbm(9);
  TrainConfig c = quick_node_config();
  c.lr = 1e300;
  c.runs = 2;
  RunMetrics m = train(c, g);
  CHECK(m.failed == 2);
  CHECK(m.warnings.size() == 2);
  CHECK(std::isnan(m.mean));
  auto doc = metrics_to_json(c, m);
  CHECK(doc["failed"] == 2);
  CHECK(doc["mean"].is_null());
}

TEST_CASE("graph-level training") {
  GraphSet set = labelled_set(60, 2);
  TrainConfig c = TrainConfig::defaults_for(Task::graph_cls);
  c.runs = 2;
  c.epochs = 10;
  c.hidden = {16, 16};
  c.mlp_hidden = 16;
  RunMetrics m = train(c, set);
  CHECK(m.failed == 0);
  CHECK(m.mean >= 0.0);
  CHECK(m.mean <= 1.0);

  TrainConfig t = TrainConfig::defaults_for(Task::tri_reg);
  t.runs = 2;
  t.epochs = 10;
  t.hidden = {8, 8, 8};
  t.injection = Injection::rwr_reg;
  t.top_k = 3;
  RunMetrics tri = train(t, set);
  CHECK(tri.metric_name == "mse");
  CHECK(tri.failed == 0);

  GraphSet tagged = set;
  tagged.split_assignment = std::vector<SplitTag>(set.size(), SplitTag::train);
  (*tagged.split_assignment)[0] = SplitTag::val;
  (*tagged.split_assignment)[1] = SplitTag::test;
  CHECK(train(t, tagged).failed == 0);

  CHECK_THROWS_AS(train(TrainConfig::defaults_for(Task::node_cls), set), ConfigError);
  CHECK_THROWS_AS(train(t, small_sbm()), ConfigError);
}

TEST_CASE("k-fold partitions") {
  GraphSet set = labelled_set(100, 4);
  auto folds = kfold_partition(set, 10, 1, true);
  std::set<int> seen;
  for (const auto& f : folds) {
    CHECK(f.size() == 10);
    seen.insert(f.begin(), f.end());
  }
  CHECK(seen.size() == 100);
  CHECK(kfold_partition(set, 10, 1, true) == folds);

  GraphSet lopsided = set;
  int ones = 0;
  for (auto& g : lopsided.graphs) {
    int label = ones < 3 ? 1 : 0;
    ones += label;
    g = g.with_graph_label(label);
  }
  std::vector<std::string> warnings;
  auto fallback = kfold_partition(lopsided, 10, 1, true, &warnings);
  CHECK(warnings.size() == 1);
  CHECK(fallback.size() == 10);
}

TEST_CASE("k-fold metrics ignore node numbering") {
  GraphSet set = labelled_set(30, 5);
  GraphSet permuted = set;
  for (std::size_t i = 0; i < set.size(); ++i) {
    permuted.graphs[i] = set.graphs[i].permuted(random_permutation(set.graphs[i].num_nodes(), i));
  }
  TrainConfig c = TrainConfig::defaults_for(Task::graph_cls);
  c.folds = 3;
  c.epochs = 8;
  c.hidden = {8, 8};
  c.mlp_hidden = 8;
  RunMetrics a = evaluate_kfold(c, set);
  RunMetrics b = evaluate_kfold(c, permuted);
  REQUIRE(a.runs.size() == 3);
  for (std::size_t f = 0; f < 3; ++f) {
    CHECK(a.runs[f].metric == doctest::Approx(b.runs[f].metric).epsilon(1e-9));
    CHECK(a.runs[f].val_loss == doctest::Approx(b.runs[f].val_loss).epsilon(1e-6));
  }
}

TEST_CASE("reports") {
  Graph g = small_sbm();
  TrainConfig c = quick_node_config();
  c.runs = 2;
  c.epochs = 5;
  RunMetrics m = train(c, g);
  auto doc = metrics_to_json(c, m);
  CHECK(doc["config_hash"] == config_hash(c));
  CHECK(doc["runs"].size() == 2);
  CHECK(doc["runs"][0].contains("stop_epoch"));
  std::string csv = curves_csv(m);
  CHECK(csv.rfind("run,seed,epoch,train_loss,val_loss\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 10);
}

}
