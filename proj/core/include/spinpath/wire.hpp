#pragma once

#include <array>
#include <string>
#include <vector>

#include "spinpath/graph.hpp"

namespace spinpath {

// A link is the p-th bond unit on an edge; indices are 0-based internally.
struct Link {
  EdgeId edge = -1;
  int index = -1;
  bool valid() const { return edge >= 0; }
  bool operator==(const Link& o) const { return edge == o.edge && index == o.index; }
  bool operator<(const Link& o) const { return edge != o.edge ? edge < o.edge : index < o.index; }
};

struct LinkEnd {
  Link link;
  Vertex at = -1;
};

// Wire configuration w = (m, c, pi) on an ExtendedGraph.
//   m_e        = colours[e].size()
//   colours    = per-link colour in 1..n_colours
//   partner    = per link, per side (0 = at edge.u, 1 = at edge.v), the link it
//                is paired with at that vertex; invalid Link when unpaired.
// Pairings are same-colour, within-vertex, symmetric, never self.
struct WireConfig {
  int n_colours = 0;
  std::vector<std::vector<int>> colours;
  std::vector<std::vector<std::array<Link, 2>>> partner;

  static WireConfig empty(const ExtendedGraph& g, int n_colours);

  int m(EdgeId e) const { return static_cast<int>(colours[static_cast<std::size_t>(e)].size()); }
  int colour(Link l) const {
    return colours[static_cast<std::size_t>(l.edge)][static_cast<std::size_t>(l.index)];
  }
  Link partner_at(Link l, int side) const {
    return partner[static_cast<std::size_t>(l.edge)][static_cast<std::size_t>(l.index)][static_cast<std::size_t>(side)];
  }
  int total_links() const;
};

// Which side of edge e sits at vertex x (0 for edge.u, 1 for edge.v).
int edge_side(const ExtendedGraph& g, EdgeId e, Vertex x);

// Structural validity: sizes, colour ranges, pairing symmetry/colour/self rules.
void validate_structure(const ExtendedGraph& g, const WireConfig& w);

// Local times per vertex (rows 0..n, ghost last) and colour (columns 0..N-1):
//   u = unpaired endpoints, v = pairs (half the paired endpoints), n = u + v.
struct LocalTimes {
  std::vector<std::vector<int>> u, v, n;
  std::vector<int> n_total;
  int at(Vertex x) const { return n_total[static_cast<std::size_t>(x)]; }
};

LocalTimes local_times(const ExtendedGraph& g, const WireConfig& w);

// Membership classes for the restricted state space: configs where the ghost
// carries only unpaired N-endpoints and original vertices carry unpaired
// endpoints of colour 1 only. LoopsOnly / OpenPair / OpenSet mirror the
// unpaired-1 pattern (all zero / exactly {x,y} / indicator of A). Invalid
// covers both state-space violations and unpaired-1 multiplicities >= 2,
// which belong to no class.
struct StateClass {
  enum class Kind { LoopsOnly, OpenPair, OpenSet, Invalid };
  Kind kind = Kind::Invalid;
  Vertex x = -1, y = -1;
  std::vector<Vertex> open_set;
};

StateClass classify(const ExtendedGraph& g, const WireConfig& w);

struct Path {
  int colour = 0;
  bool is_loop = false;
  std::vector<Link> links;            // traversal order
  std::array<LinkEnd, 2> extremal{};  // walks only: the two unpaired ends
};

// Maximal pairing-connected sets, split into loops and walks. Deterministic:
// paths are ordered by their smallest link id, walks start from their smaller
// extremal end, loops from their smallest link.
struct PathDecomposition {
  std::vector<Path> paths;
  int loop_count() const;
  int walk_count() const;
};

PathDecomposition decompose_paths(const ExtendedGraph& g, const WireConfig& w);

// Number of N-walks with one extremal link on {x,g} and the other on {y,g}.
int count_mxy(const ExtendedGraph& g, const WireConfig& w, Vertex x, Vertex y);

// Partial pairings of q labelled objects leaving exactly u unpaired:
// q! / (u! 2^v v!) with v = (q-u)/2. Exact for q <= 20, lgamma-based beyond.
double count_vertex_pairings(int q, int u);
double log_count_vertex_pairings(int q, int u);

// Removes the extremal ghost links of every ({x,g},{y,g})-extremal N-walk and
// leaves their former partners unpaired. Requires w in the loops-only class
// with at least one such walk.
WireConfig colour_switch_forward(const ExtendedGraph& g, const WireConfig& w, Vertex x, Vertex y);

// JSON round trip (schema documented in the README).
std::string wire_to_json(const ExtendedGraph& g, const WireConfig& w);
WireConfig wire_from_json(const ExtendedGraph& g, const std::string& json_text);

// Compact byte key identifying a labelled configuration (used by the
// empirical-law tables in tests and experiments).
std::string canonical_key(const WireConfig& w);

}  // namespace spinpath
