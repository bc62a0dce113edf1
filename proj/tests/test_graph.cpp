#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rwrkit/error.hpp"
#include "rwrkit/generators.hpp"
#include "rwrkit/graph_io.hpp"
#include "support.hpp"

using namespace rwrkit;
using namespace rwrkit::testing;

namespace {

bool symmetric(const Graph& g) {
  for (int v = 0; v < g.num_nodes(); ++v)
    for (int u : g.neighbors(v))
      if (!g.has_edge(u, v)) return false;
  return true;
}

std::int64_t triangles_by_triples(const Graph& g) {
  std::int64_t t = 0;
  const int n = g.num_nodes();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) t += g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c);
  return t;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("edge list parsing") {
  std::istringstream p3("0 1\n1 2\n");
  auto r = parse_edge_list(p3);
  CHECK(r.graph.num_nodes() == 3);
  CHECK(r.graph.num_edges() == 2);
  CHECK(r.graph.has_edge(1, 0));

  std::istringstream dup("0 1\n1 0\n1 1\n");
  auto d = parse_edge_list(dup);
  CHECK(d.graph.num_edges() == 1);
  CHECK(d.cleanup.duplicates == 1);
  CHECK(d.cleanup.self_loops == 1);
}

TEST_CASE("edge list ids, header and errors") {
  std::istringstream sparse("# comment\n10 30\n30 20\n");
  auto r = parse_edge_list(sparse);
  CHECK(r.graph.num_nodes() == 3);
  CHECK(r.id_map == std::vector<std::int64_t>{10, 20, 30});
  CHECK(r.graph.has_edge(0, 2));

  std::istringstream header("# nodes=5\n0 1\n");
  auto h = parse_edge_list(header);
  CHECK(h.graph.num_nodes() == 5);
  CHECK(h.graph.degree(4) == 0);

  std::istringstream oob("# nodes=2\n0 2\n");
  CHECK_THROWS_AS(parse_edge_list(oob), BoundsError);

  std::istringstream bad("0 1\n1 2 3\n");
  try {
    parse_edge_list(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  std::istringstream directed("0 1\n1 0\n1 2\n");
  auto dr = parse_edge_list(directed, true);
  CHECK(dr.graph.num_edges() == 2);
  CHECK(dr.symmetrized == 1);
}

TEST_CASE("graph construction validates endpoints and stays symmetric") {
  CHECK_THROWS_AS(Graph::from_edges(2, std::vector<Edge>{{0, 2}}), BoundsError);
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(symmetric(random_graph(15, 0.3, seed)));
}

TEST_CASE("feature CSV") {
  Graph p3 = path(3);
  std::istringstream csv("0,1.0\n1,0.0\n0,1.0\n");
  Graph g = parse_features(csv, p3);
  REQUIRE(g.labels());
  CHECK(*g.labels() == std::vector<int>{0, 1, 0});
  CHECK(g.features()->cols() == 1);
  CHECK(g.num_classes() == 2);

  std::istringstream labels_only("0\n1\n0\n");
  Graph fb = parse_features(labels_only, p3, LabelColumn::first, 4);
  CHECK(fb.features()->cols() == 5);
  CHECK((*fb.features())(1, 2) == 1.0);
  CHECK((*fb.features())(0, 1) == 1.0);

  std::istringstream short_csv("0,1\n1,0\n");
  CHECK_THROWS_AS(parse_features(short_csv, p3), ShapeError);

  std::istringstream unlabeled("1.5,2\n0,0\n3,1\n");
  Graph nl = parse_features(unlabeled, p3, LabelColumn::none);
  CHECK(!nl.labels());
  CHECK((*nl.features())(0, 0) == 1.5);
}

TEST_CASE("dense labels must cover every class") {
  CHECK(validate_dense_labels(std::vector<int>{0, 2, 1}) == 3);
  CHECK_THROWS_AS(validate_dense_labels(std::vector<int>{0, 2}), ConfigError);
}

TEST_CASE("JSON round trip") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 3, 4, 5, 6.25;
  Graph g = path(3).with_features(x).with_labels({0, 1, 0}).with_target(2.5);
  Graph back = graph_from_json(graph_to_json(g));
  CHECK(back == g);

  GraphSet set{{complete(3).with_graph_label(1), path(4).with_graph_label(0)},
               std::vector<SplitTag>{SplitTag::train, SplitTag::test}};
  GraphSet set_back = graphset_from_json(graphset_to_json(set));
  REQUIRE(set_back.size() == 2);
  CHECK(set_back.graphs[0] == set.graphs[0]);
  CHECK(*set_back.split_assignment == *set.split_assignment);

  auto doc = graph_to_json(g);
  doc["colour"] = 1;
  CHECK_THROWS_AS(graph_from_json(doc), ConfigError);
}

TEST_CASE("permuted graphs carry their payloads") {
  Graph g = path(4).with_labels({0, 1, 1, 0});
  std::vector<int> perm{2, 0, 3, 1};
  Graph p = g.permuted(perm);
  CHECK(p.has_edge(perm[0], perm[1]));
  CHECK(p.has_edge(perm[2], perm[3]));
  CHECK((*p.labels())[perm[1]] == 1);
}

TEST_CASE("SBM generator") {
  SbmParams degenerate{2, 4, 1.0, 0.0, 2, 0.0, 1};
  Graph g = generate_sbm(degenerate);
  CHECK(g.num_edges() == 12);
  CHECK(!g.has_edge(3, 4));
  CHECK(*g.labels() == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});

  SbmParams p;
  p.seed = 7;
  Graph big = generate_sbm(p);
  double intra = 0, inter = 0;
  for (auto [u, v] : big.edge_list()) ((u / 200 == v / 200) ? intra : inter) += 2;
  intra /= 400;
  inter /= 400;
  // mean degree over 400 nodes; per-node sd / sqrt(400)
  CHECK(std::abs(intra - 19.9) < 3 * std::sqrt(199 * 0.1 * 0.9 / 200.0));
  CHECK(std::abs(inter - 2.0) < 3 * std::sqrt(200 * 0.01 * 0.99 / 200.0));

  CHECK(graph_to_json(generate_sbm(p)) == graph_to_json(big));
  CHECK_THROWS_AS(generate_sbm({2, 10, 0.1, 0.2, 2, 1.0, 0}), ConfigError);
  CHECK_THROWS_AS(generate_sbm({3, 10, 0.2, 0.1, 2, 1.0, 0}), ConfigError);
}

TEST_CASE("triangle counting") {
  CHECK(count_triangles(complete(3)) == 1);
  CHECK(count_triangles(complete(4)) == 4);
  CHECK(count_triangles(path(3)) == 0);
  CHECK(count_triangles(cycle(6)) == 0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Graph g = random_graph(3 + static_cast<int>(seed % 8), 0.5, seed);
    Eigen::MatrixXd a = g.adjacency_dense();
    double trace = (a * a * a).trace() / 6.0;
    CHECK(count_triangles(g) == static_cast<std::int64_t>(std::llround(trace)));
    CHECK(count_triangles(g) == triangles_by_triples(g));
  }
}

TEST_CASE("triangle graph sets") {
  TriangleSetParams p;
  p.count = 30;
  p.seed = 4;
  GraphSet set = generate_triangle_graphs(p);
  REQUIRE(set.size() == 30);
  for (const auto& g : set.graphs) {
    CHECK(g.num_nodes() >= 4);
    CHECK(g.num_nodes() <= 25);
    CHECK(*g.target() == static_cast<double>(count_triangles(g)));
    CHECK(g.features()->cols() == 25);
  }
  CHECK(graphset_to_json(generate_triangle_graphs(p)) == graphset_to_json(set));
}

TEST_CASE("node splits") {
  Graph g = path(6).with_labels({0, 0, 0, 1, 1, 1});
  NodeSplit s = make_split(g, {1, 1, 1, 9});
  CHECK(s.train.size() == 2);
  CHECK(s.val.size() == 1);
  CHECK(s.test.size() == 1);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 4);
  NodeSplit again = make_split(g, {1, 1, 1, 9});
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  CHECK_THROWS_AS(make_split(g, {4, 1, 1, 0}), ConfigError);
  CHECK_THROWS_AS(make_split(g, {2, 1, 2, 0}), ConfigError);
}

}
