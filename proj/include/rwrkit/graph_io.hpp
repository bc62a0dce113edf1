#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwrkit/graph.hpp"

namespace rwrkit {

struct EdgeListResult {
  Graph graph;
  EdgeCleanup cleanup;
  // id_map[v] = original node id of dense node v.
  std::vector<std::int64_t> id_map;
  // Reversed copies merged when the input was declared directed.
  std::size_t symmetrized = 0;
};

// Whitespace-separated "u v" lines; '#' lines are comments, except an
// optional "# nodes=N" header. With the header, ids must lie in [0, N) and
// are kept as-is (isolated nodes included). Without it, the distinct ids are
// relabelled densely in ascending order.
EdgeListResult load_edge_list(const std::filesystem::path& path, bool directed_input = false);
EdgeListResult parse_edge_list(std::istream& in, bool directed_input = false);

// One original id per line, line v = id of dense node v.
void save_id_map(const std::filesystem::path& path, const std::vector<std::int64_t>& id_map);

enum class LabelColumn { first, none };

// Headerless CSV, row i = node i: "label,f1,...,fd" (LabelColumn::first) or
// "f1,...,fd". Rows holding a label only leave X to the one-hot degree
// fallback capped at max_degree_bucket.
Graph load_features(const std::filesystem::path& path, const Graph& graph,
                    LabelColumn label_column = LabelColumn::first, int max_degree_bucket = 32);
Graph parse_features(std::istream& in, const Graph& graph, LabelColumn label_column = LabelColumn::first,
                     int max_degree_bucket = 32);

// n x (max_degree_bucket + 1) one-hot degree matrix; degrees above the cap
// share the last bucket.
Eigen::MatrixXd degree_one_hot(const Graph& graph, int max_degree_bucket);

// Canonical JSON document {n, edges, features?, labels?, label?, target?}.
nlohmann::ordered_json graph_to_json(const Graph& graph);
Graph graph_from_json(const nlohmann::ordered_json& doc);

nlohmann::ordered_json graphset_to_json(const GraphSet& set);
GraphSet graphset_from_json(const nlohmann::ordered_json& doc);

// JSON files are written with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

}  // namespace rwrkit
