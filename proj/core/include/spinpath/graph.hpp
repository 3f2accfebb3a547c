#pragma once

#include <string>
#include <utility>
#include <vector>

#include "spinpath/common.hpp"

namespace spinpath {

using Vertex = int;
using EdgeId = int;

constexpr int kInfDistance = -1;  // graph_distance result for disconnected pairs

struct Edge {
  Vertex u, v;  // canonical: u < v for original edges; ghost edges store (x, ghost)
  Vertex other(Vertex w) const { return w == u ? v : u; }
};

// Finite simple undirected graph on dense vertex ids 0..n-1.
class Graph {
 public:
  Graph() = default;

  // Rejects self-loops, duplicate edges and out-of-range ids.
  static Graph build(const std::vector<std::pair<Vertex, Vertex>>& edge_list, int n_vertices);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Vertex>& neighbours(Vertex x) const;
  const std::vector<EdgeId>& incident_edges(Vertex x) const;
  int degree(Vertex x) const { return static_cast<int>(neighbours(x).size()); }
  int max_degree() const;
  bool has_edge(Vertex u, Vertex v) const;
  EdgeId edge_id(Vertex u, Vertex v) const;  // -1 if absent

  // BFS shortest-path length; kInfDistance when disconnected.
  int distance(Vertex x, Vertex y) const;

  void check_vertex(Vertex x) const {
    require(x >= 0 && x < n_, Errc::VertexOutOfRange, "vertex " + std::to_string(x));
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
  std::vector<std::vector<EdgeId>> incident_;
};

// Built-in generators used by experiment configs.
Graph make_path(int length_vertices);
Graph make_cycle(int length_vertices);
Graph make_grid(int rows, int cols);
Graph make_regular_tree(int degree, int depth);

// JSON object {"n": int, "edges": [[u,v],...]}.
Graph graph_from_json(const std::string& json_text);
std::string graph_to_json(const Graph& g);

// The base graph with a distinguished ghost vertex g = |V| joined to every
// original vertex. Edge ids: 0..E-1 original (same order as base),
// E + x = ghost edge of original vertex x.
class ExtendedGraph {
 public:
  ExtendedGraph() = default;
  explicit ExtendedGraph(Graph base);

  const Graph& base() const { return base_; }
  Vertex ghost() const { return base_.vertex_count(); }
  int original_vertex_count() const { return base_.vertex_count(); }
  int original_edge_count() const { return base_.edge_count(); }
  int total_edge_count() const { return base_.edge_count() + base_.vertex_count(); }

  bool is_ghost_edge(EdgeId e) const { return e >= base_.edge_count(); }
  EdgeId ghost_edge(Vertex x) const {
    base_.check_vertex(x);
    return base_.edge_count() + x;
  }
  Edge edge(EdgeId e) const {
    return is_ghost_edge(e) ? Edge{e - base_.edge_count(), ghost()} : base_.edge(e);
  }
  // All edges (original + ghost) incident to a vertex. For g this is every ghost edge.
  const std::vector<EdgeId>& incident_edges(Vertex x) const { return incident_[static_cast<std::size_t>(x)]; }
  int degree(Vertex x) const { return static_cast<int>(incident_[static_cast<std::size_t>(x)].size()); }

 private:
  Graph base_;
  std::vector<std::vector<EdgeId>> incident_;  // indexed 0..n (ghost last)
};

// Edge/vertex boundary vocabulary for a set of original vertices A.
// A^c always means V \ A; the ghost is never a member of A.
struct BoundaryInfo {
  std::vector<Vertex> set_a;
  std::vector<EdgeId> edges_touching;    // E_A: >=1 endpoint in A (original or ghost edges)
  std::vector<EdgeId> edge_boundary;     // dE_A: one endpoint in A, one in A^c
  std::vector<EdgeId> ghost_edges;       // Eg_A: ghost edges of A
  std::vector<Vertex> external_boundary; // d^e A, subset of A^c
  std::vector<Vertex> internal_boundary; // d^i A, subset of A
};

BoundaryInfo boundary_sets(const ExtendedGraph& g, const std::vector<Vertex>& a);

}  // namespace spinpath
