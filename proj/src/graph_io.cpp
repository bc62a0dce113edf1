#include "rwrkit/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

#include "rwrkit/error.hpp"

namespace rwrkit {
namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view tok) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

}  // namespace

EdgeListResult parse_edge_list(std::istream& in, bool directed_input) {
  std::optional<std::int64_t> declared_n;
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      auto rest = trim(body.substr(1));
      if (rest.starts_with("nodes=")) {
        auto n = parse_number<std::int64_t>(trim(rest.substr(6)));
        if (!n || *n < 0) throw ParseError(lineno, "malformed nodes header");
        declared_n = *n;
      }
      continue;
    }
    auto toks = split_ws(body);
    if (toks.size() != 2) throw ParseError(lineno, "expected \"u v\", got \"" + std::string(body) + "\"");
    auto u = parse_number<std::int64_t>(toks[0]);
    auto v = parse_number<std::int64_t>(toks[1]);
    if (!u || !v || *u < 0 || *v < 0) {
      throw ParseError(lineno, "node ids must be non-negative integers");
    }
    if (declared_n && (*u >= *declared_n || *v >= *declared_n)) {
      throw BoundsError("line " + std::to_string(lineno) + ": node id " + std::to_string(std::max(*u, *v)) +
                        " >= declared nodes=" + std::to_string(*declared_n));
    }
    raw.emplace_back(*u, *v);
  }

  EdgeListResult result;
  int n = 0;
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  if (declared_n) {
    n = static_cast<int>(*declared_n);
    result.id_map.resize(n);
    for (int v = 0; v < n; ++v) result.id_map[v] = v;
    for (auto [u, v] : raw) edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  } else {
    std::vector<std::int64_t> ids;
    ids.reserve(raw.size() * 2);
    for (auto [u, v] : raw) {
      ids.push_back(u);
      ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    n = static_cast<int>(ids.size());
    auto dense = [&](std::int64_t id) {
      return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (auto [u, v] : raw) edges.emplace_back(dense(u), dense(v));
    result.id_map = std::move(ids);
  }

  if (directed_input) {
    // Repeated ordered arcs are duplicates; an arc whose reverse is also
    // present is the symmetric partner, not a duplicate.
    std::vector<Edge> arcs;
    std::size_t self_loops = 0;
    for (auto e : edges) {
      if (e.first == e.second) {
        ++self_loops;
      } else {
        arcs.push_back(e);
      }
    }
    std::sort(arcs.begin(), arcs.end());
    auto last = std::unique(arcs.begin(), arcs.end());
    std::size_t duplicates = static_cast<std::size_t>(arcs.end() - last);
    arcs.erase(last, arcs.end());
    for (auto [u, v] : arcs) {
      if (u < v && std::binary_search(arcs.begin(), arcs.end(), Edge{v, u})) ++result.symmetrized;
    }
    result.graph = Graph::from_edges(n, arcs);
    result.cleanup = {self_loops, duplicates};
  } else {
    result.graph = Graph::from_edges(n, edges, &result.cleanup);
  }
  return result;
}

EdgeListResult load_edge_list(const std::filesystem::path& path, bool directed_input) {
  auto in = open_input(path);
  return parse_edge_list(in, directed_input);
}

void save_id_map(const std::filesystem::path& path, const std::vector<std::int64_t>& id_map) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (auto id : id_map) out << id << '\n';
}

Eigen::MatrixXd degree_one_hot(const Graph& graph, int max_degree_bucket) {
  if (max_degree_bucket < 0) throw ConfigError("max degree bucket must be non-negative");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(graph.num_nodes(), max_degree_bucket + 1);
  for (int v = 0; v < graph.num_nodes(); ++v) x(v, std::min(graph.degree(v), max_degree_bucket)) = 1.0;
  return x;
}

Graph parse_features(std::istream& in, const Graph& graph, LabelColumn label_column, int max_degree_bucket) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> width;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = body.find(',', start);
      fields.push_back(trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    std::size_t first = 0;
    if (label_column == LabelColumn::first) {
      auto l = parse_number<int>(fields[0]);
      if (!l) throw ParseError(lineno, "label must be an integer");
      labels.push_back(*l);
      first = 1;
    }
    std::vector<double> row;
    for (std::size_t i = first; i < fields.size(); ++i) {
      if (fields[i].empty() && fields.size() == first + 1) break;  // "label," with no features
      auto f = parse_number<double>(fields[i]);
      if (!f) throw ParseError(lineno, "feature \"" + std::string(fields[i]) + "\" is not a number");
      row.push_back(*f);
    }
    if (width && *width != row.size()) {
      throw ShapeError("line " + std::to_string(lineno) + ": expected " + std::to_string(*width) +
                       " features, got " + std::to_string(row.size()));
    }
    width = row.size();
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != graph.num_nodes()) {
    throw ShapeError("feature file has " + std::to_string(rows.size()) + " rows, graph has " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  Eigen::MatrixXd x;
  if (width.value_or(0) == 0) {
    x = degree_one_hot(graph, max_degree_bucket);
  } else {
    x.resize(graph.num_nodes(), static_cast<Eigen::Index>(*width));
    for (int v = 0; v < graph.num_nodes(); ++v) {
      for (std::size_t j = 0; j < *width; ++j) x(v, static_cast<Eigen::Index>(j)) = rows[v][j];
    }
  }
  Graph g = graph.with_features(std::move(x));
  if (label_column == LabelColumn::first) g = g.with_labels(std::move(labels));
  return g;
}

Graph load_features(const std::filesystem::path& path, const Graph& graph, LabelColumn label_column,
                    int max_degree_bucket) {
  auto in = open_input(path);
  return parse_features(in, graph, label_column, max_degree_bucket);
}

nlohmann::ordered_json graph_to_json(const Graph& graph) {
  nlohmann::ordered_json doc;
  doc["n"] = graph.num_nodes();
  auto edges = nlohmann::ordered_json::array();
  for (auto [u, v] : graph.edge_list()) edges.push_back({u, v});
  doc["edges"] = std::move(edges);
  if (const auto& x = graph.features()) {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < x->rows(); ++i) {
      auto row = nlohmann::ordered_json::array();
      for (Eigen::Index j = 0; j < x->cols(); ++j) row.push_back((*x)(i, j));
      rows.push_back(std::move(row));
    }
    doc["features"] = std::move(rows);
  }
  if (const auto& l = graph.labels()) doc["labels"] = *l;
  if (auto l = graph.graph_label()) doc["label"] = *l;
  if (auto t = graph.target()) doc["target"] = *t;
  return doc;
}

Graph graph_from_json(const nlohmann::ordered_json& doc) {
  static const std::set<std::string> known = {"n", "edges", "features", "labels", "label", "target"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown graph field \"" + key + "\"");
  }
  try {
    int n = doc.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    Graph g = Graph::from_edges(n, edges);
    if (doc.contains("features")) {
      const auto& rows = doc["features"];
      Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size());
      Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != d) throw ShapeError("ragged feature rows");
        for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j].get<double>();
      }
      g = g.with_features(std::move(x));
    }
    if (doc.contains("labels")) g = g.with_labels(doc["labels"].get<std::vector<int>>());
    if (doc.contains("label")) g = g.with_graph_label(doc["label"].get<int>());
    if (doc.contains("target")) g = g.with_target(doc["target"].get<double>());
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed graph document: ") + e.what());
  }
}

nlohmann::ordered_json graphset_to_json(const GraphSet& set) {
  nlohmann::ordered_json doc;
  auto graphs = nlohmann::ordered_json::array();
  for (const auto& g : set.graphs) graphs.push_back(graph_to_json(g));
  doc["graphs"] = std::move(graphs);
  if (set.split_assignment) {
    auto tags = nlohmann::ordered_json::array();
    for (auto t : *set.split_assignment) {
      tags.push_back(t == SplitTag::train ? "train" : t == SplitTag::val ? "val" : "test");
    }
    doc["split"] = std::move(tags);
  }
  return doc;
}

GraphSet graphset_from_json(const nlohmann::ordered_json& doc) {
  GraphSet set;
  if (!doc.contains("graphs")) throw ConfigError("graph set document lacks \"graphs\"");
  for (const auto& g : doc["graphs"]) set.graphs.push_back(graph_from_json(g));
  if (doc.contains("split")) {
    std::vector<SplitTag> tags;
    for (const auto& t : doc["split"]) {
      auto s = t.get<std::string>();
      if (s == "train") {
        tags.push_back(SplitTag::train);
      } else if (s == "val") {
        tags.push_back(SplitTag::val);
      } else if (s == "test") {
        tags.push_back(SplitTag::test);
      } else {
        throw ConfigError("unknown split tag \"" + s + "\"");
      }
    }
    if (tags.size() != set.graphs.size()) throw ShapeError("split tags do not match graph count");
    set.split_assignment = std::move(tags);
  }
  set.num_classes();
  return set;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

nlohmann::ordered_json read_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace rwrkit
