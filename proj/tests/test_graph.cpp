#include <algorithm>

#include "doctest.h"
#include "spinpath/graph.hpp"
#include "spinpath/rng.hpp"

using namespace spinpath;

TEST_CASE("build_graph basics and rejections") {
  Graph empty = Graph::build({}, 1);
  CHECK(empty.vertex_count() == 1);
  CHECK(empty.edge_count() == 0);

  Graph p3 = make_path(3);
  CHECK(p3.degree(0) == 1);
  CHECK(p3.degree(1) == 2);
  CHECK(p3.degree(2) == 1);

  CHECK_THROWS_AS(Graph::build({{0, 0}}, 2), Error);
  CHECK_THROWS_AS(Graph::build({{0, 1}, {1, 0}}, 2), Error);
  CHECK_THROWS_AS(Graph::build({{0, 3}}, 3), Error);
  try {
    Graph::build({{0, 1}, {1, 0}}, 2);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateEdge);
  }
}

TEST_CASE("3x3 grid matches the nine-vertex nearest-neighbour graph") {
  Graph grid = make_grid(3, 3);
  CHECK(grid.vertex_count() == 9);
  CHECK(grid.edge_count() == 12);
  CHECK(grid.max_degree() == 4);
  // corner to opposite corner
  CHECK(grid.distance(0, 8) == 4);
}

TEST_CASE("ghost extension") {
  ExtendedGraph p3(make_path(3));
  CHECK(p3.ghost() == 3);
  CHECK(p3.total_edge_count() == 2 + 3);
  CHECK(p3.degree(p3.ghost()) == 3);

  ExtendedGraph single(Graph::build({}, 1));
  CHECK(single.total_edge_count() == 1);

  ExtendedGraph grid(make_grid(3, 3));
  CHECK(grid.original_vertex_count() + 1 == 10);
  CHECK(grid.total_edge_count() == 12 + 9);
  for (Vertex x = 0; x < 9; ++x) {
    Edge e = grid.edge(grid.ghost_edge(x));
    CHECK(e.u == x);
    CHECK(e.v == grid.ghost());
  }
}

TEST_CASE("graph distance") {
  Graph p3 = make_path(3);
  CHECK(p3.distance(0, 2) == 2);
  CHECK(p3.distance(1, 1) == 0);
  Graph two = Graph::build({}, 2);
  CHECK(two.distance(0, 1) == kInfDistance);
  CHECK_THROWS_AS(p3.distance(0, 7), Error);
}

TEST_CASE("distance is a metric on random connected graphs") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 4 + rng.below_int(5);
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex v = 1; v < n; ++v) edges.emplace_back(v, rng.below_int(v));  // random tree
    for (int extra = 0; extra < 3; ++extra) {
      Vertex u = rng.below_int(n), v = rng.below_int(n);
      if (u == v) continue;
      bool dup = false;
      for (auto [a, b] : edges)
        if (std::minmax(a, b) == std::minmax(u, v)) dup = true;
      if (!dup) edges.emplace_back(u, v);
    }
    Graph g = Graph::build(edges, n);
    for (Vertex a = 0; a < n; ++a)
      for (Vertex b = 0; b < n; ++b) {
        CHECK(g.distance(a, b) == g.distance(b, a));
        for (Vertex c = 0; c < n; ++c)
          CHECK(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c));
        if (a == b) CHECK(g.distance(a, b) == 0);
      }
  }
}

TEST_CASE("subgraph distances dominate full-graph distances") {
  Graph full = make_grid(3, 3);
  // remove the centre column edges: distances can only grow
  std::vector<std::pair<Vertex, Vertex>> pruned;
  for (const auto& e : full.edges())
    if (!(e.u == 4 || e.v == 4)) pruned.emplace_back(e.u, e.v);
  Graph sub = Graph::build(pruned, 9);
  for (Vertex a = 0; a < 9; ++a)
    for (Vertex b = 0; b < 9; ++b) {
      int ds = sub.distance(a, b), df = full.distance(a, b);
      if (ds != kInfDistance) CHECK(ds >= df);
    }
}

TEST_CASE("boundary sets") {
  ExtendedGraph p3(make_path(3));

  SUBCASE("full vertex set") {
    BoundaryInfo info = boundary_sets(p3, {0, 1, 2});
    CHECK(info.edge_boundary.empty());
    CHECK(info.external_boundary.empty());
    CHECK(info.ghost_edges.size() == 3);
    CHECK(info.edges_touching.size() == 5);
  }
  SUBCASE("single vertex") {
    BoundaryInfo info = boundary_sets(p3, {0});
    CHECK(info.edges_touching.size() == 2);  // {0,1} and {0,g}
    REQUIRE(info.edge_boundary.size() == 1);
    Edge b = p3.edge(info.edge_boundary[0]);
    CHECK(b.u == 0);
    CHECK(b.v == 1);
    CHECK(info.external_boundary == std::vector<Vertex>{1});
    CHECK(info.internal_boundary == std::vector<Vertex>{0});
  }
  SUBCASE("empty set") {
    BoundaryInfo info = boundary_sets(p3, {});
    CHECK(info.edges_touching.empty());
    CHECK(info.edge_boundary.empty());
    CHECK(info.ghost_edges.empty());
    CHECK(info.external_boundary.empty());
    CHECK(info.internal_boundary.empty());
  }
  SUBCASE("ghost is rejected") {
    CHECK_THROWS_AS(boundary_sets(p3, {p3.ghost()}), Error);
  }
  SUBCASE("ghost edges never cross") {
    for (auto a : std::vector<std::vector<Vertex>>{{0}, {1}, {0, 2}, {0, 1}}) {
      BoundaryInfo info = boundary_sets(p3, a);
      for (EdgeId e : info.edge_boundary) CHECK(!p3.is_ghost_edge(e));
      CHECK(info.ghost_edges.size() == a.size());
    }
  }
}

TEST_CASE("generators and JSON round trip") {
  Graph c4 = make_cycle(4);
  CHECK(c4.edge_count() == 4);
  Graph tree = make_regular_tree(3, 2);
  CHECK(tree.vertex_count() == 1 + 3 + 6);
  CHECK(tree.max_degree() == 3);

  Graph parsed = graph_from_json(graph_to_json(c4));
  CHECK(parsed.edge_count() == 4);
  CHECK(parsed.vertex_count() == 4);
  CHECK(parsed.distance(0, 2) == 2);
}
