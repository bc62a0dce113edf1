// rwrkit command-line front end. Every table goes to --out (stdout when
// omitted); CSV tables get a JSON sidecar holding the full configuration.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rwrkit/analysis.hpp"
#include "rwrkit/error.hpp"
#include "rwrkit/format.hpp"
#include "rwrkit/generators.hpp"
#include "rwrkit/graph_io.hpp"
#include "rwrkit/parallel.hpp"
#include "rwrkit/rwr.hpp"
#include "rwrkit/train.hpp"
#include "rwrkit/wl.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rwrkit;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string config;
  bool seed_set = false;
  bool threads_set = false;
};

struct GraphInput {
  std::string path;
  bool directed = false;
  std::string features;
  bool no_label_column = false;
  int degree_bucket = 32;

  void add_to(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--graph", path, "edge list, or a graph .json document");
    if (required) opt->required();
    cmd->add_flag("--directed", directed, "edge list holds directed arcs; they are symmetrised");
    cmd->add_option("--features", features, "node CSV: label,f1,...,fd per row");
    cmd->add_flag("--no-label-column", no_label_column, "feature CSV rows carry no label");
    cmd->add_option("--degree-bucket", degree_bucket, "cap for the one-hot degree fallback")->check(CLI::PositiveNumber);
  }

  Graph load() const {
    if (fs::path(path).extension() == ".json") return graph_from_json(read_json(path));
    EdgeListResult parsed = load_edge_list(path, directed);
    if (parsed.cleanup.self_loops || parsed.cleanup.duplicates) {
      std::cerr << "warning: dropped " << parsed.cleanup.self_loops << " self-loops and "
                << parsed.cleanup.duplicates << " duplicate edges\n";
    }
    if (features.empty()) return parsed.graph;
    return load_features(features, parsed.graph, no_label_column ? LabelColumn::none : LabelColumn::first,
                         degree_bucket);
  }

  json describe() const {
    json doc{{"graph", path}, {"directed", directed}};
    if (!features.empty()) {
      doc["features"] = features;
      doc["label_column"] = !no_label_column;
      doc["degree_bucket"] = degree_bucket;
    }
    return doc;
  }
};

void write_text(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file) throw ConfigError("cannot open " + g.out + " for writing");
  file << text;
}

fs::path sidecar_path(const std::string& out) {
  fs::path p(out);
  fs::path side = fs::path(out).replace_extension(".json");
  if (side == p) side = fs::path(out + ".config.json");
  return side;
}

// CSV to --out and its sidecar next to it (stderr-free stdout mode prints the
// sidecar after the table).
void write_table(const Globals& g, const std::string& csv, const json& sidecar) {
  write_text(g, csv);
  if (g.out.empty()) {
    std::cout << sidecar.dump(2) << '\n';
  } else {
    write_json(sidecar_path(g.out), sidecar);
  }
}

void write_doc(const Globals& g, const json& doc) { write_text(g, doc.dump(2) + "\n"); }

json base_sidecar(const std::string& command, const Globals& g) {
  return json{{"command", command}, {"seed", g.seed}, {"threads", g.threads}};
}

// Config file first, then explicit flags. Without either, the task follows
// the input kind.
TrainConfig load_train_config(const Globals& g, const std::optional<std::string>& task,
                              const std::optional<std::string>& injection, bool graph_set) {
  json doc = g.config.empty() ? json::object() : read_json(g.config);
  if (task) {
    doc["task"] = *task;
  } else if (!doc.contains("task")) {
    doc["task"] = graph_set ? "graph_cls" : "node_cls";
  }
  if (injection) doc["injection"] = *injection;
  TrainConfig config = config_from_json(doc);
  if (g.seed_set || !doc.contains("seed")) config.seed = g.seed;
  if (g.threads_set || !doc.contains("threads")) config.threads = g.threads;
  return config;
}

void report_warnings(const RunMetrics& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
}

void require_success(const RunMetrics& m) {
  if (!m.runs.empty() && m.failed == static_cast<int>(m.runs.size())) {
    throw NumericalError("every training run diverged");
  }
}

std::string opt_str(const std::optional<int>& v) { return v ? std::to_string(*v) : "NA"; }
std::string opt_str(const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : "NA"; }

json prop1_json(const Prop1Report& r) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return json{{"n1", r.n1},
              {"n2", r.n2},
              {"k_wl", opt(r.k_wl)},
              {"reps_differ", opt(r.reps_differ)},
              {"rwr_seeded_round", opt(r.rwr_seeded_round)},
              {"matching_differs", opt(r.matching_differs)},
              {"pass", r.pass},
              {"warnings", r.warnings}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walk with restart toolkit: RWR matrices, 1-WL checks, GCN training with RWR features and "
               "regularisation, and analysis sweeps"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--threads", g.threads, "worker threads")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { g.threads_set = true; });
  app.add_option("--out", g.out, "output file (stdout when omitted)");
  app.add_option("--config", g.config, "training configuration JSON");

  std::function<void()> action;

  // ---- rwr ---------------------------------------------------------------
  auto* rwr = app.add_subcommand("rwr", "RWR matrices")->require_subcommand(1);
  GraphInput rwr_graph;
  RwrOptions rwr_opts;
  int k_step = 0;
  auto* rwr_compute = rwr->add_subcommand("compute", "all-sources RWR table");
  rwr_graph.add_to(rwr_compute);
  rwr_compute->add_option("--c", rwr_opts.c, "restart probability");
  rwr_compute->add_option("--tol", rwr_opts.tol, "L1 residual tolerance");
  rwr_compute->add_option("--max-iter", rwr_opts.max_iter, "iteration cap");
  rwr_compute->add_option("--k-step", k_step, "emit the k-step representation instead (0: converged)")
      ->check(CLI::NonNegativeNumber);
  rwr_compute->callback([&] {
    action = [&] {
      Graph graph = rwr_graph.load();
      rwr_opts.threads = g.threads;
      RwrMatrix s = k_step > 0 ? k_step_representation(graph, k_step, rwr_opts.c) : rwr_matrix(graph, rwr_opts);
      std::ostringstream out;
      write_rwr_table(out, s);
      write_text(g, out.str());
    };
  });

  std::string topk_table;
  int topk_k = 0;
  GraphInput topk_graph;
  auto* rwr_topk = rwr->add_subcommand("topk", "keep the K largest scores per row");
  topk_graph.add_to(rwr_topk, false);
  rwr_topk->add_option("--table", topk_table, "existing RWR table instead of --graph");
  rwr_topk->add_option("--k", topk_k, "entries kept per row")->required();
  rwr_topk->add_option("--c", rwr_opts.c, "restart probability when computing from --graph");
  rwr_topk->callback([&] {
    action = [&] {
      std::optional<RwrMatrix> s;
      if (!topk_table.empty()) {
        std::ifstream in(topk_table);
        if (!in) throw ConfigError("cannot open " + topk_table);
        s = read_rwr_table(in);
      } else if (!topk_graph.path.empty()) {
        rwr_opts.threads = g.threads;
        s = rwr_matrix(topk_graph.load(), rwr_opts);
      } else {
        throw ConfigError("rwr topk needs --table or --graph");
      }
      std::ostringstream out;
      write_rwr_table(out, top_k_sparsify(*s, topk_k));
      write_text(g, out.str());
    };
  });

  // ---- wl ----------------------------------------------------------------
  auto* wl = app.add_subcommand("wl", "1-WL and k-step RWR distinguishing checks")->require_subcommand(1);
  GraphInput wl_g1, wl_g2;
  double wl_c = kDefaultRestart;
  int wl_q = 9;
  auto* wl_verify = wl->add_subcommand("verify", "check one graph pair");
  wl_verify->add_option("--g1", wl_g1.path, "first graph")->required();
  wl_verify->add_option("--g2", wl_g2.path, "second graph")->required();
  wl_verify->add_option("--c", wl_c, "restart probability");
  wl_verify->add_option("--quantize", wl_q, "decimal digits kept when comparing rows");
  wl_verify->callback([&] {
    action = [&] {
      Graph a = wl_g1.load(), b = wl_g2.load();
      write_doc(g, prop1_json(verify_prop1(a, b, wl_c, wl_q)));
    };
  });

  int sweep_n = 5;
  std::optional<std::size_t> sweep_sample;
  auto* wl_sweep = wl->add_subcommand("pairsweep", "check all non-isomorphic connected pairs on n nodes");
  wl_sweep->add_option("--n", sweep_n, "node count")->check(CLI::Range(1, 8));
  wl_sweep->add_option("--sample", sweep_sample, "random subset of pairs");
  wl_sweep->add_option("--c", wl_c, "restart probability");
  wl_sweep->add_option("--quantize", wl_q, "decimal digits kept when comparing rows");
  wl_sweep->callback([&] {
    action = [&] {
      GraphPairs pairs = enumerate_graph_pairs(sweep_n, sweep_sample, g.seed);
      std::vector<Prop1Report> reports(pairs.pairs.size());
      parallel_for(static_cast<int>(pairs.pairs.size()), g.threads, [&](int i) {
        const auto& p = pairs.pairs[i];
        reports[i] = verify_prop1(pairs.graphs[p.first], pairs.graphs[p.second], wl_c, wl_q);
      });
      std::ostringstream csv;
      csv << "pair_id,n,k_wl,reps_differ,rwr_seeded_rounds,pass\n";
      int violations = 0;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        violations += !r.pass;
        csv << i << ',' << sweep_n << ',' << opt_str(r.k_wl) << ',' << opt_str(r.reps_differ) << ','
            << opt_str(r.rwr_seeded_round) << ',' << (r.pass ? "true" : "false") << '\n';
      }
      json side = base_sidecar("wl pairsweep", g);
      side["n"] = sweep_n;
      side["sample"] = sweep_sample ? json(*sweep_sample) : json(nullptr);
      side["c"] = wl_c;
      side["quantize"] = wl_q;
      side["graphs"] = pairs.graphs.size();
      side["pairs"] = reports.size();
      side["violations"] = violations;
      write_table(g, csv.str(), side);
    };
  });

  // ---- train -------------------------------------------------------------
  GraphInput train_graph;
  std::string train_set;
  std::optional<std::string> task, injection;
  bool kfold = false;
  std::string curves;
  auto add_train_inputs = [&](CLI::App* cmd) {
    train_graph.add_to(cmd, false);
    cmd->add_option("--graphs", train_set, "graph set .json for graph-level tasks");
    cmd->add_option("--task", task, "node_cls, graph_cls or tri_reg")
        ->check(CLI::IsMember({"node_cls", "graph_cls", "tri_reg"}));
    cmd->add_option("--injection", injection, "none, adjacency, rwr, rwr+reg or reg_only")
        ->check(CLI::IsMember({"none", "adjacency", "rwr", "rwr+reg", "reg_only"}));
  };
  auto check_inputs = [&] {
    if (train_graph.path.empty() == train_set.empty()) throw ConfigError("give exactly one of --graph and --graphs");
  };
  auto* train_cmd = app.add_subcommand("train", "train a GCN and report test metrics");
  add_train_inputs(train_cmd);
  train_cmd->add_flag("--kfold", kfold, "k-fold cross validation over a graph set");
  train_cmd->add_option("--curves", curves, "per-epoch loss CSV");
  train_cmd->callback([&] {
    action = [&] {
      check_inputs();
      TrainConfig config = load_train_config(g, task, injection, !train_set.empty());
      RunMetrics metrics;
      if (!train_set.empty()) {
        GraphSet set = graphset_from_json(read_json(train_set));
        metrics = kfold ? evaluate_kfold(config, set) : train(config, set);
      } else {
        if (kfold) throw ConfigError("--kfold needs --graphs");
        metrics = train(config, train_graph.load());
      }
      report_warnings(metrics);
      require_success(metrics);
      write_doc(g, metrics_to_json(config, metrics));
      if (!curves.empty()) {
        std::ofstream file(curves, std::ios::binary);
        if (!file) throw ConfigError("cannot open " + curves + " for writing");
        file << curves_csv(metrics);
      }
    };
  });

  // ---- sweep -------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "training sweeps over RWR settings")->require_subcommand(1);
  std::vector<double> cs;
  std::vector<int> ks;
  auto run_sweep = [&](const std::string& name, auto&& body) {
    check_inputs();
    TrainConfig config = load_train_config(g, task, injection, !train_set.empty());
    std::vector<SweepRow> rows;
    if (!train_set.empty()) {
      GraphSet set = graphset_from_json(read_json(train_set));
      rows = body(config, set);
    } else {
      rows = body(config, train_graph.load());
    }
    for (const auto& row : rows) report_warnings(row.metrics);
    json side = base_sidecar(name, g);
    side["input"] = train_set.empty() ? train_graph.describe() : json{{"graphs", train_set}};
    side["train_config"] = config_to_json(config);
    side["config_hash"] = config_hash(config);
    write_table(g, sweep_csv(config, rows), side);
  };
  auto* sweep_c = sweep->add_subcommand("restart", "accuracy per restart probability");
  add_train_inputs(sweep_c);
  sweep_c->add_option("--values", cs, "restart probabilities")->delimiter(',');
  sweep_c->callback([&] {
    action = [&] {
      if (!injection) injection = "rwr";
      run_sweep("sweep restart", [&](const TrainConfig& config, const auto& data) {
        return sweep_restart(config, data, cs);
      });
    };
  });
  auto* sweep_k = sweep->add_subcommand("topk", "accuracy per top-K sparsification level");
  add_train_inputs(sweep_k);
  sweep_k->add_option("--values", ks, "K values")->delimiter(',');
  sweep_k->callback([&] {
    action = [&] {
      if (!injection) injection = "reg_only";
      run_sweep("sweep topk", [&](const TrainConfig& config, const auto& data) {
        return sweep_topk(config, data, ks);
      });
    };
  });

  // ---- analyze -----------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "structure of the RWR matrix")->require_subcommand(1);
  GraphInput an_graph;
  double an_c = kDefaultRestart;
  HopMassOptions hop_opts;
  auto* hops = analyze->add_subcommand("hops", "mean RWR mass per hop distance");
  an_graph.add_to(hops);
  hops->add_option("--c", an_c, "restart probability");
  hops->add_option("--min-mass", hop_opts.min_mass, "omit distances with less mean mass");
  hops->add_option("--min-diameter", hop_opts.min_diameter,
                   "skip components with diameter <= this (negative: keep all)");
  hops->callback([&] {
    action = [&] {
      Graph graph = an_graph.load();
      RwrOptions opts;
      opts.c = an_c;
      opts.threads = g.threads;
      auto profile = hop_mass_profile(graph, rwr_matrix(graph, opts), hop_opts);
      std::ostringstream csv;
      csv << "distance,mass,cumulative\n";
      for (const auto& [d, m] : profile.masses) {
        csv << d << ',' << format_double(m) << ',' << format_double(profile.cumulative(d)) << '\n';
      }
      json side = base_sidecar("analyze hops", g);
      side["input"] = an_graph.describe();
      side["c"] = an_c;
      side["min_mass"] = hop_opts.min_mass;
      side["min_diameter"] = hop_opts.min_diameter;
      side["sources"] = profile.sources;
      write_table(g, csv.str(), side);
    };
  });
  int tau_diameter = 4;
  auto* kendall = analyze->add_subcommand("kendall", "tau-b of drw sequences against their sorted order");
  an_graph.add_to(kendall);
  kendall->add_option("--c", an_c, "restart probability");
  kendall->add_option("--min-diameter", tau_diameter, "diameter threshold for the filtered row");
  kendall->callback([&] {
    action = [&] {
      Graph graph = an_graph.load();
      RwrOptions opts;
      opts.c = an_c;
      opts.threads = g.threads;
      RwrMatrix s = rwr_matrix(graph, opts);
      std::ostringstream csv;
      csv << "diameter_filter,sources,undefined,mean_tau,mean_tau_reversed\n";
      for (bool filter : {false, true}) {
        auto k = kendall_analysis(graph, s, filter, tau_diameter);
        csv << (filter ? "true" : "false") << ',' << k.sources << ',' << k.undefined << ','
            << format_double(k.mean_tau) << ',' << format_double(k.mean_tau_reversed) << '\n';
      }
      json side = base_sidecar("analyze kendall", g);
      side["input"] = an_graph.describe();
      side["c"] = an_c;
      side["min_diameter"] = tau_diameter;
      write_table(g, csv.str(), side);
    };
  });

  // ---- gen ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "synthetic inputs")->require_subcommand(1);
  SbmParams sbm;
  auto* gen_sbm = gen->add_subcommand("sbm", "stochastic block model with noisy block-indicator features");
  gen_sbm->add_option("--blocks", sbm.blocks, "number of blocks");
  gen_sbm->add_option("--block-size", sbm.nodes_per_block, "nodes per block");
  gen_sbm->add_option("--p-in", sbm.p_in, "within-block edge probability");
  gen_sbm->add_option("--p-out", sbm.p_out, "between-block edge probability");
  gen_sbm->add_option("--feature-dim", sbm.feature_dim, "feature columns (>= blocks)");
  gen_sbm->add_option("--noise", sbm.noise, "Gaussian noise scale on the features");
  gen_sbm->callback([&] {
    action = [&] {
      sbm.seed = g.seed;
      write_doc(g, graph_to_json(generate_sbm(sbm)));
    };
  });
  TriangleSetParams tri;
  auto* gen_tri = gen->add_subcommand("triangles", "random graphs labelled with their triangle counts");
  gen_tri->add_option("--count", tri.count, "number of graphs");
  gen_tri->add_option("--n-min", tri.n_min, "smallest graph");
  gen_tri->add_option("--n-max", tri.n_max, "largest graph");
  gen_tri->add_option("--p", tri.edge_prob, "edge probability");
  gen_tri->callback([&] {
    action = [&] {
      tri.seed = g.seed;
      write_doc(g, graphset_to_json(generate_triangle_graphs(tri)));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    action();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
