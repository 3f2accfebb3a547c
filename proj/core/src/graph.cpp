#include "spinpath/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "json.hpp"

namespace spinpath {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::VertexOutOfRange: return "VertexOutOfRange";
    case Errc::GhostInSet: return "GhostInSet";
    case Errc::ParityViolation: return "ParityViolation";
    case Errc::InvalidState: return "InvalidState";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::InfiniteCaps: return "InfiniteCaps";
    case Errc::AggregateModeUnsupported: return "AggregateModeUnsupported";
    case Errc::InadmissiblePair: return "InadmissiblePair";
    case Errc::FieldZero: return "FieldZero";
    case Errc::UnsupportedN: return "UnsupportedN";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NotEquilibrated: return "NotEquilibrated";
    case Errc::NoCandidateSteps: return "NoCandidateSteps";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::InsufficientSignal: return "InsufficientSignal";
    case Errc::ExplorationComplete: return "ExplorationComplete";
    case Errc::UsageError: return "UsageError";
  }
  return "UnknownError";
}

Graph Graph::build(const std::vector<std::pair<Vertex, Vertex>>& edge_list, int n_vertices) {
  require(n_vertices >= 0, Errc::VertexOutOfRange, "negative vertex count");
  Graph g;
  g.n_ = n_vertices;
  g.adj_.assign(static_cast<std::size_t>(n_vertices), {});
  g.incident_.assign(static_cast<std::size_t>(n_vertices), {});
  std::set<std::pair<Vertex, Vertex>> seen;
  for (auto [u, v] : edge_list) {
    require(u != v, Errc::SelfLoop, "edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    require(u >= 0 && u < n_vertices && v >= 0 && v < n_vertices, Errc::VertexOutOfRange,
            "edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    auto key = std::minmax(u, v);
    require(seen.insert(key).second, Errc::DuplicateEdge,
            "edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    EdgeId id = static_cast<EdgeId>(g.edges_.size());
    g.edges_.push_back(Edge{key.first, key.second});
    g.adj_[static_cast<std::size_t>(key.first)].push_back(key.second);
    g.adj_[static_cast<std::size_t>(key.second)].push_back(key.first);
    g.incident_[static_cast<std::size_t>(key.first)].push_back(id);
    g.incident_[static_cast<std::size_t>(key.second)].push_back(id);
  }
  return g;
}

const std::vector<Vertex>& Graph::neighbours(Vertex x) const {
  check_vertex(x);
  return adj_[static_cast<std::size_t>(x)];
}

const std::vector<EdgeId>& Graph::incident_edges(Vertex x) const {
  check_vertex(x);
  return incident_[static_cast<std::size_t>(x)];
}

int Graph::max_degree() const {
  int d = 0;
  for (Vertex x = 0; x < n_; ++x) d = std::max(d, degree(x));
  return d;
}

bool Graph::has_edge(Vertex u, Vertex v) const { return edge_id(u, v) >= 0; }

EdgeId Graph::edge_id(Vertex u, Vertex v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_) return -1;
  for (EdgeId e : incident_[static_cast<std::size_t>(u)])
    if (edges_[static_cast<std::size_t>(e)].other(u) == v) return e;
  return -1;
}

int Graph::distance(Vertex x, Vertex y) const {
  check_vertex(x);
  check_vertex(y);
  if (x == y) return 0;
  std::vector<int> dist(static_cast<std::size_t>(n_), kInfDistance);
  dist[static_cast<std::size_t>(x)] = 0;
  std::deque<Vertex> queue{x};
  while (!queue.empty()) {
    Vertex cur = queue.front();
    queue.pop_front();
    for (Vertex nb : adj_[static_cast<std::size_t>(cur)]) {
      if (dist[static_cast<std::size_t>(nb)] != kInfDistance) continue;
      dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(cur)] + 1;
      if (nb == y) return dist[static_cast<std::size_t>(nb)];
      queue.push_back(nb);
    }
  }
  return kInfDistance;
}

Graph make_path(int length_vertices) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int i = 0; i + 1 < length_vertices; ++i) edges.emplace_back(i, i + 1);
  return Graph::build(edges, length_vertices);
}

Graph make_cycle(int length_vertices) {
  require(length_vertices >= 3, Errc::UsageError, "cycle needs >= 3 vertices");
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int i = 0; i < length_vertices; ++i) edges.emplace_back(i, (i + 1) % length_vertices);
  return Graph::build(edges, length_vertices);
}

Graph make_grid(int rows, int cols) {
  require(rows >= 1 && cols >= 1, Errc::UsageError, "grid needs positive dimensions");
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph::build(edges, rows * cols);
}

Graph make_regular_tree(int degree, int depth) {
  require(degree >= 1 && depth >= 0, Errc::UsageError, "tree needs degree >= 1, depth >= 0");
  std::vector<std::pair<Vertex, Vertex>> edges;
  int next = 1;
  std::vector<Vertex> frontier{0};
  for (int level = 0; level < depth; ++level) {
    std::vector<Vertex> next_frontier;
    for (Vertex parent : frontier) {
      int children = (level == 0) ? degree : degree - 1;
      for (int c = 0; c < children; ++c) {
        edges.emplace_back(parent, next);
        next_frontier.push_back(next);
        ++next;
      }
    }
    frontier = std::move(next_frontier);
  }
  return Graph::build(edges, next);
}

Graph graph_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  require(j.contains("n") && j.contains("edges"), Errc::UsageError,
          "graph JSON needs {\"n\", \"edges\"}");
  std::vector<std::pair<Vertex, Vertex>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return Graph::build(edges, j.at("n").get<int>());
}

std::string graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["n"] = g.vertex_count();
  auto edges = nlohmann::json::array();
  for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
  j["edges"] = edges;
  return j.dump();
}

ExtendedGraph::ExtendedGraph(Graph base) : base_(std::move(base)) {
  const int n = base_.vertex_count();
  incident_.assign(static_cast<std::size_t>(n) + 1, {});
  for (Vertex x = 0; x < n; ++x) {
    incident_[static_cast<std::size_t>(x)] = base_.incident_edges(x);
    incident_[static_cast<std::size_t>(x)].push_back(base_.edge_count() + x);
    incident_[static_cast<std::size_t>(n)].push_back(base_.edge_count() + x);
  }
}

BoundaryInfo boundary_sets(const ExtendedGraph& g, const std::vector<Vertex>& a) {
  const int n = g.original_vertex_count();
  std::vector<char> in_a(static_cast<std::size_t>(n), 0);
  for (Vertex x : a) {
    require(x != g.ghost(), Errc::GhostInSet, "ghost vertex cannot be a member of A");
    g.base().check_vertex(x);
    in_a[static_cast<std::size_t>(x)] = 1;
  }
  BoundaryInfo info;
  info.set_a = a;
  std::sort(info.set_a.begin(), info.set_a.end());
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    const Edge& ed = g.base().edge(e);
    bool au = in_a[static_cast<std::size_t>(ed.u)], av = in_a[static_cast<std::size_t>(ed.v)];
    if (au || av) info.edges_touching.push_back(e);
    if (au != av) info.edge_boundary.push_back(e);
  }
  for (Vertex x = 0; x < n; ++x) {
    if (!in_a[static_cast<std::size_t>(x)]) continue;
    info.edges_touching.push_back(g.ghost_edge(x));
    info.ghost_edges.push_back(g.ghost_edge(x));
  }
  for (Vertex x = 0; x < n; ++x) {
    bool x_in = in_a[static_cast<std::size_t>(x)];
    bool has_opposite = false;
    for (Vertex nb : g.base().neighbours(x))
      if (in_a[static_cast<std::size_t>(nb)] != x_in) has_opposite = true;
    if (!has_opposite) continue;
    if (x_in)
      info.internal_boundary.push_back(x);
    else
      info.external_boundary.push_back(x);
  }
  return info;
}

}  // namespace spinpath
