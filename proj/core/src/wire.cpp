#include "spinpath/wire.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "json.hpp"

namespace spinpath {

WireConfig WireConfig::empty(const ExtendedGraph& g, int n_colours) {
  WireConfig w;
  w.n_colours = n_colours;
  w.colours.assign(static_cast<std::size_t>(g.total_edge_count()), {});
  w.partner.assign(static_cast<std::size_t>(g.total_edge_count()), {});
  return w;
}

int WireConfig::total_links() const {
  int t = 0;
  for (const auto& c : colours) t += static_cast<int>(c.size());
  return t;
}

int edge_side(const ExtendedGraph& g, EdgeId e, Vertex x) {
  Edge ed = g.edge(e);
  if (ed.u == x) return 0;
  if (ed.v == x) return 1;
  fail(Errc::VertexOutOfRange, "vertex not an endpoint of edge");
}

void validate_structure(const ExtendedGraph& g, const WireConfig& w) {
  const auto ne = static_cast<std::size_t>(g.total_edge_count());
  require(w.n_colours >= 1, Errc::InvalidConfig, "n_colours must be >= 1");
  require(w.colours.size() == ne && w.partner.size() == ne, Errc::InvalidConfig,
          "edge arrays sized to the extended graph");
  for (EdgeId e = 0; e < g.total_edge_count(); ++e) {
    const auto& cols = w.colours[static_cast<std::size_t>(e)];
    const auto& prt = w.partner[static_cast<std::size_t>(e)];
    require(cols.size() == prt.size(), Errc::InvalidConfig, "colour/partner size mismatch");
    for (int p = 0; p < static_cast<int>(cols.size()); ++p) {
      int c = cols[static_cast<std::size_t>(p)];
      require(c >= 1 && c <= w.n_colours, Errc::InvalidConfig, "colour out of range");
      for (int side = 0; side < 2; ++side) {
        Link q = prt[static_cast<std::size_t>(p)][static_cast<std::size_t>(side)];
        if (!q.valid()) continue;
        Vertex at = side == 0 ? g.edge(e).u : g.edge(e).v;
        require(!(q.edge == e && q.index == p), Errc::InvalidConfig, "link paired to itself");
        require(q.edge >= 0 && q.edge < g.total_edge_count(), Errc::InvalidConfig, "partner edge id");
        require(q.index >= 0 && q.index < w.m(q.edge), Errc::InvalidConfig, "partner link index");
        Edge qe = g.edge(q.edge);
        require(qe.u == at || qe.v == at, Errc::InvalidConfig, "partner not incident to vertex");
        require(w.colour(q) == c, Errc::InvalidConfig, "paired links must share a colour");
        Link back = w.partner_at(q, edge_side(g, q.edge, at));
        require(back.edge == e && back.index == p, Errc::InvalidConfig, "pairing not symmetric");
      }
    }
  }
}

LocalTimes local_times(const ExtendedGraph& g, const WireConfig& w) {
  const int n = g.original_vertex_count();
  const int nc = w.n_colours;
  LocalTimes lt;
  lt.u.assign(static_cast<std::size_t>(n) + 1, std::vector<int>(static_cast<std::size_t>(nc), 0));
  lt.v = lt.u;
  lt.n = lt.u;
  lt.n_total.assign(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::vector<int>> paired = lt.u;  // paired endpoint counts
  for (EdgeId e = 0; e < g.total_edge_count(); ++e) {
    Edge ed = g.edge(e);
    for (int p = 0; p < w.m(e); ++p) {
      int ci = w.colours[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)] - 1;
      const auto& pr = w.partner[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)];
      for (int side = 0; side < 2; ++side) {
        Vertex at = side == 0 ? ed.u : ed.v;
        auto& row = pr[static_cast<std::size_t>(side)].valid() ? paired : lt.u;
        row[static_cast<std::size_t>(at)][static_cast<std::size_t>(ci)] += 1;
      }
    }
  }
  for (Vertex x = 0; x <= n; ++x) {
    for (int ci = 0; ci < nc; ++ci) {
      int pe = paired[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)];
      require(pe % 2 == 0, Errc::ParityViolation, "odd paired-endpoint count");
      lt.v[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)] = pe / 2;
      lt.n[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)] =
          lt.u[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)] + pe / 2;
      lt.n_total[static_cast<std::size_t>(x)] += lt.n[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)];
    }
  }
  return lt;
}

StateClass classify(const ExtendedGraph& g, const WireConfig& w) {
  LocalTimes lt = local_times(g, w);
  const int n = g.original_vertex_count();
  const int nc = w.n_colours;
  StateClass sc;
  // Ghost: no pairings, and only colour-N links on ghost edges.
  const auto gi = static_cast<std::size_t>(n);
  for (int ci = 0; ci < nc; ++ci) {
    if (lt.v[gi][static_cast<std::size_t>(ci)] != 0) return sc;
    if (ci != nc - 1 && lt.n[gi][static_cast<std::size_t>(ci)] != 0) return sc;
  }
  // Original vertices: unpaired endpoints of colour >= 2 forbidden.
  for (Vertex x = 0; x < n; ++x)
    for (int ci = 1; ci < nc; ++ci)
      if (lt.u[static_cast<std::size_t>(x)][static_cast<std::size_t>(ci)] != 0) return sc;
  std::vector<Vertex> open;
  for (Vertex x = 0; x < n; ++x) {
    int u1 = lt.u[static_cast<std::size_t>(x)][0];
    if (u1 == 0) continue;
    if (u1 > 1) return sc;  // outside every S(A)
    open.push_back(x);
  }
  if (open.empty()) {
    sc.kind = StateClass::Kind::LoopsOnly;
  } else if (open.size() == 2) {
    sc.kind = StateClass::Kind::OpenPair;
    sc.x = open[0];
    sc.y = open[1];
    sc.open_set = open;
  } else {
    sc.kind = StateClass::Kind::OpenSet;
    sc.open_set = open;
  }
  return sc;
}

int PathDecomposition::loop_count() const {
  int c = 0;
  for (const auto& p : paths) c += p.is_loop ? 1 : 0;
  return c;
}
int PathDecomposition::walk_count() const { return static_cast<int>(paths.size()) - loop_count(); }

namespace {

struct EndRef {
  Link link;
  int side;
  bool operator<(const EndRef& o) const {
    if (!(link == o.link)) return link < o.link;
    return side < o.side;
  }
};

Path trace_walk(const ExtendedGraph& g, const WireConfig& w, EndRef start,
                std::vector<std::vector<char>>& used) {
  Path path;
  path.colour = w.colour(start.link);
  Link cur = start.link;
  int entry_side = start.side;
  Vertex start_at = entry_side == 0 ? g.edge(cur.edge).u : g.edge(cur.edge).v;
  path.extremal[0] = LinkEnd{cur, start_at};
  while (true) {
    used[static_cast<std::size_t>(cur.edge)][static_cast<std::size_t>(cur.index)] = 1;
    path.links.push_back(cur);
    int exit_side = 1 - entry_side;
    Vertex exit_at = exit_side == 0 ? g.edge(cur.edge).u : g.edge(cur.edge).v;
    Link next = w.partner_at(cur, exit_side);
    if (!next.valid()) {
      path.extremal[1] = LinkEnd{cur, exit_at};
      break;
    }
    entry_side = edge_side(g, next.edge, exit_at);
    cur = next;
  }
  return path;
}

Path trace_loop(const ExtendedGraph& g, const WireConfig& w, Link start,
                std::vector<std::vector<char>>& used) {
  Path path;
  path.colour = w.colour(start);
  path.is_loop = true;
  Link cur = start;
  int entry_side = 1;  // enter the first link at its v side, exit via u: fixed direction
  while (true) {
    used[static_cast<std::size_t>(cur.edge)][static_cast<std::size_t>(cur.index)] = 1;
    path.links.push_back(cur);
    int exit_side = 1 - entry_side;
    Vertex exit_at = exit_side == 0 ? g.edge(cur.edge).u : g.edge(cur.edge).v;
    Link next = w.partner_at(cur, exit_side);
    entry_side = edge_side(g, next.edge, exit_at);
    cur = next;
    if (cur == start) break;
  }
  return path;
}

}  // namespace

PathDecomposition decompose_paths(const ExtendedGraph& g, const WireConfig& w) {
  std::vector<std::vector<char>> used;
  used.reserve(w.colours.size());
  for (const auto& c : w.colours) used.emplace_back(c.size(), 0);

  PathDecomposition dec;
  // Walks first: start from every unpaired end, smaller end first.
  std::vector<EndRef> starts;
  for (EdgeId e = 0; e < g.total_edge_count(); ++e)
    for (int p = 0; p < w.m(e); ++p)
      for (int side = 0; side < 2; ++side)
        if (!w.partner_at(Link{e, p}, side).valid()) starts.push_back(EndRef{Link{e, p}, side});
  std::sort(starts.begin(), starts.end());
  for (const auto& s : starts) {
    if (used[static_cast<std::size_t>(s.link.edge)][static_cast<std::size_t>(s.link.index)]) continue;
    dec.paths.push_back(trace_walk(g, w, s, used));
  }
  // A single link unpaired at both ends is one walk; trace_walk marks it used
  // on the first of its two start entries, so it is not traced twice.
  for (EdgeId e = 0; e < g.total_edge_count(); ++e)
    for (int p = 0; p < w.m(e); ++p)
      if (!used[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)])
        dec.paths.push_back(trace_loop(g, w, Link{e, p}, used));

  std::sort(dec.paths.begin(), dec.paths.end(), [](const Path& a, const Path& b) {
    return *std::min_element(a.links.begin(), a.links.end()) <
           *std::min_element(b.links.begin(), b.links.end());
  });
  return dec;
}

int count_mxy(const ExtendedGraph& g, const WireConfig& w, Vertex x, Vertex y) {
  require(x != y, Errc::PreconditionViolated, "x and y must differ");
  g.base().check_vertex(x);
  g.base().check_vertex(y);
  const EdgeId ex = g.ghost_edge(x), ey = g.ghost_edge(y);
  int count = 0;
  for (const auto& path : decompose_paths(g, w).paths) {
    if (path.is_loop || path.colour != w.n_colours) continue;
    EdgeId a = path.extremal[0].link.edge, b = path.extremal[1].link.edge;
    if ((a == ex && b == ey) || (a == ey && b == ex)) ++count;
  }
  return count;
}

double count_vertex_pairings(int q, int u) {
  require(q >= 0 && u >= 0 && q >= u, Errc::PreconditionViolated, "need q >= u >= 0");
  require((q - u) % 2 == 0, Errc::ParityViolation, "q - u must be even");
  const int v = (q - u) / 2;
  if (q <= 20) {
    auto fact = [](int k) {
      std::uint64_t f = 1;
      for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
      return f;
    };
    std::uint64_t denom = fact(u) * (std::uint64_t{1} << v) * fact(v);
    return static_cast<double>(fact(q) / denom);
  }
  return std::exp(log_count_vertex_pairings(q, u));
}

double log_count_vertex_pairings(int q, int u) {
  require(q >= 0 && u >= 0 && q >= u, Errc::PreconditionViolated, "need q >= u >= 0");
  require((q - u) % 2 == 0, Errc::ParityViolation, "q - u must be even");
  const double v = (q - u) / 2.0;
  return std::lgamma(q + 1.0) - std::lgamma(u + 1.0) - v * std::log(2.0) - std::lgamma(v + 1.0);
}

WireConfig colour_switch_forward(const ExtendedGraph& g, const WireConfig& w, Vertex x, Vertex y) {
  require(classify(g, w).kind == StateClass::Kind::LoopsOnly, Errc::PreconditionViolated,
          "input must be a loops-only configuration");
  const EdgeId ex = g.ghost_edge(x), ey = g.ghost_edge(y);
  // Extremal ghost links of every ({x,g},{y,g})-extremal N-walk.
  std::vector<std::vector<char>> removed;
  removed.reserve(w.colours.size());
  for (const auto& c : w.colours) removed.emplace_back(c.size(), 0);
  int walks = 0;
  for (const auto& path : decompose_paths(g, w).paths) {
    if (path.is_loop || path.colour != w.n_colours) continue;
    EdgeId a = path.extremal[0].link.edge, b = path.extremal[1].link.edge;
    if (!((a == ex && b == ey) || (a == ey && b == ex))) continue;
    ++walks;
    for (const auto& end : path.extremal)
      removed[static_cast<std::size_t>(end.link.edge)][static_cast<std::size_t>(end.link.index)] = 1;
  }
  require(walks >= 1, Errc::PreconditionViolated, "no ({x,g},{y,g})-extremal N-walk present");

  // Rebuild with surviving links; pairings to removed links become unpaired.
  std::vector<std::vector<int>> remap(w.colours.size());
  WireConfig out;
  out.n_colours = w.n_colours;
  out.colours.resize(w.colours.size());
  out.partner.resize(w.partner.size());
  for (EdgeId e = 0; e < g.total_edge_count(); ++e) {
    remap[static_cast<std::size_t>(e)].assign(static_cast<std::size_t>(w.m(e)), -1);
    for (int p = 0; p < w.m(e); ++p) {
      if (removed[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)]) continue;
      remap[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)] =
          static_cast<int>(out.colours[static_cast<std::size_t>(e)].size());
      out.colours[static_cast<std::size_t>(e)].push_back(w.colour(Link{e, p}));
      out.partner[static_cast<std::size_t>(e)].push_back({Link{}, Link{}});
    }
  }
  for (EdgeId e = 0; e < g.total_edge_count(); ++e)
    for (int p = 0; p < w.m(e); ++p) {
      int np = remap[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)];
      if (np < 0) continue;
      for (int side = 0; side < 2; ++side) {
        Link q = w.partner_at(Link{e, p}, side);
        if (!q.valid()) continue;
        int nq = remap[static_cast<std::size_t>(q.edge)][static_cast<std::size_t>(q.index)];
        out.partner[static_cast<std::size_t>(e)][static_cast<std::size_t>(np)][static_cast<std::size_t>(side)] =
            nq < 0 ? Link{} : Link{q.edge, nq};
      }
    }
  return out;
}

std::string wire_to_json(const ExtendedGraph& g, const WireConfig& w) {
  nlohmann::json j;
  j["n"] = g.original_vertex_count();
  j["n_colours"] = w.n_colours;
  auto m = nlohmann::json::array();
  auto c = nlohmann::json::array();
  auto pairs = nlohmann::json::array();
  for (EdgeId e = 0; e < g.total_edge_count(); ++e) {
    if (w.m(e) == 0) continue;
    Edge ed = g.edge(e);
    m.push_back({ed.u, ed.v, w.m(e)});
    c.push_back({ed.u, ed.v, w.colours[static_cast<std::size_t>(e)]});
    for (int p = 0; p < w.m(e); ++p)
      for (int side = 0; side < 2; ++side) {
        Link q = w.partner_at(Link{e, p}, side);
        if (!q.valid()) continue;
        Vertex at = side == 0 ? ed.u : ed.v;
        // Emit each unordered pair once.
        if (q.edge < e || (q.edge == e && q.index < p)) continue;
        Edge qe = g.edge(q.edge);
        pairs.push_back({nlohmann::json::array({ed.u, ed.v, p, at}),
                         nlohmann::json::array({qe.u, qe.v, q.index, at})});
      }
  }
  j["m"] = m;
  j["c"] = c;
  j["pairings"] = pairs;
  return j.dump();
}

namespace {
EdgeId edge_from_pair(const ExtendedGraph& g, Vertex u, Vertex v) {
  if (u == g.ghost()) std::swap(u, v);
  if (v == g.ghost()) return g.ghost_edge(u);
  EdgeId e = g.base().edge_id(u, v);
  require(e >= 0, Errc::UsageError, "unknown edge in wire JSON");
  return e;
}
}  // namespace

WireConfig wire_from_json(const ExtendedGraph& g, const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  WireConfig w = WireConfig::empty(g, j.at("n_colours").get<int>());
  for (const auto& row : j.at("m")) {
    EdgeId e = edge_from_pair(g, row.at(0).get<int>(), row.at(1).get<int>());
    int me = row.at(2).get<int>();
    w.colours[static_cast<std::size_t>(e)].assign(static_cast<std::size_t>(me), 1);
    w.partner[static_cast<std::size_t>(e)].assign(static_cast<std::size_t>(me), {Link{}, Link{}});
  }
  for (const auto& row : j.at("c")) {
    EdgeId e = edge_from_pair(g, row.at(0).get<int>(), row.at(1).get<int>());
    auto cols = row.at(2).get<std::vector<int>>();
    require(cols.size() == w.colours[static_cast<std::size_t>(e)].size(), Errc::UsageError,
            "colour list length mismatch");
    w.colours[static_cast<std::size_t>(e)] = cols;
  }
  for (const auto& pr : j.at("pairings")) {
    const auto& a = pr.at(0);
    const auto& b = pr.at(1);
    EdgeId ea = edge_from_pair(g, a.at(0).get<int>(), a.at(1).get<int>());
    EdgeId eb = edge_from_pair(g, b.at(0).get<int>(), b.at(1).get<int>());
    Link la{ea, a.at(2).get<int>()};
    Link lb{eb, b.at(2).get<int>()};
    Vertex at = a.at(3).get<int>();
    require(at == b.at(3).get<int>(), Errc::UsageError, "pairing endpoints disagree on vertex");
    w.partner[static_cast<std::size_t>(ea)][static_cast<std::size_t>(la.index)]
             [static_cast<std::size_t>(edge_side(g, ea, at))] = lb;
    w.partner[static_cast<std::size_t>(eb)][static_cast<std::size_t>(lb.index)]
             [static_cast<std::size_t>(edge_side(g, eb, at))] = la;
  }
  validate_structure(g, w);
  return w;
}

std::string canonical_key(const WireConfig& w) {
  std::string key;
  key.reserve(64);
  auto push16 = [&key](int v) {
    key.push_back(static_cast<char>((v + 2) & 0xff));
    key.push_back(static_cast<char>(((v + 2) >> 8) & 0xff));
  };
  for (EdgeId e = 0; e < static_cast<EdgeId>(w.colours.size()); ++e) {
    push16(-1);  // edge separator
    push16(w.m(e));
    for (int p = 0; p < w.m(e); ++p) {
      push16(w.colours[static_cast<std::size_t>(e)][static_cast<std::size_t>(p)]);
      for (int side = 0; side < 2; ++side) {
        Link q = w.partner_at(Link{e, p}, side);
        push16(q.edge);
        push16(q.index);
      }
    }
  }
  return key;
}

}  // namespace spinpath
