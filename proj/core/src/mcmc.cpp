#include "spinpath/mcmc.hpp"

#include <algorithm>
#include <cmath>

namespace spinpath {

double MoveStats::acceptance_rate() const {
  std::uint64_t p = 0, a = 0;
  for (int i = 0; i < kMoveTypeCount; ++i) {
    p += proposed[static_cast<std::size_t>(i)];
    a += accepted[static_cast<std::size_t>(i)];
  }
  return p == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(p);
}

namespace {

void pair_links_at(const ExtendedGraph& g, WireConfig& w, Vertex x, Link a, Link b) {
  int sa = edge_side(g, a.edge, x), sb = edge_side(g, b.edge, x);
  w.partner[static_cast<std::size_t>(a.edge)][static_cast<std::size_t>(a.index)][static_cast<std::size_t>(sa)] = b;
  w.partner[static_cast<std::size_t>(b.edge)][static_cast<std::size_t>(b.index)][static_cast<std::size_t>(sb)] = a;
}

void unpair_link_at(const ExtendedGraph& g, WireConfig& w, Vertex x, Link a) {
  int sa = edge_side(g, a.edge, x);
  Link b = w.partner_at(a, sa);
  if (!b.valid()) return;
  int sb = edge_side(g, b.edge, x);
  w.partner[static_cast<std::size_t>(a.edge)][static_cast<std::size_t>(a.index)][static_cast<std::size_t>(sa)] = Link{};
  w.partner[static_cast<std::size_t>(b.edge)][static_cast<std::size_t>(b.index)][static_cast<std::size_t>(sb)] = Link{};
}

void pop_link(WireConfig& w, EdgeId e) {
  w.colours[static_cast<std::size_t>(e)].pop_back();
  w.partner[static_cast<std::size_t>(e)].pop_back();
}

void push_link(WireConfig& w, EdgeId e, int colour) {
  w.colours[static_cast<std::size_t>(e)].push_back(colour);
  w.partner[static_cast<std::size_t>(e)].push_back({Link{}, Link{}});
}

}  // namespace

WormChain::WormChain(const ExtendedGraph& g, ModelParams params, std::uint64_t seed)
    : g_(&g), params_(std::move(params)), rng_(seed) {
  params_.validate();
  config_ = WireConfig::empty(g, params_.n_colours);
  local_time_.assign(static_cast<std::size_t>(g.original_vertex_count()), 0);
  log_weight_ = 0.0;

  // Fundamental cycles from a BFS spanning forest.
  const Graph& base = g.base();
  std::vector<Vertex> parent(static_cast<std::size_t>(base.vertex_count()), -1);
  std::vector<EdgeId> parent_edge(static_cast<std::size_t>(base.vertex_count()), -1);
  std::vector<int> depth(static_cast<std::size_t>(base.vertex_count()), -1);
  std::vector<char> tree_edge(static_cast<std::size_t>(base.edge_count()), 0);
  for (Vertex root = 0; root < base.vertex_count(); ++root) {
    if (depth[static_cast<std::size_t>(root)] >= 0) continue;
    depth[static_cast<std::size_t>(root)] = 0;
    std::vector<Vertex> queue{root};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      Vertex cur = queue[qi];
      for (EdgeId e : base.incident_edges(cur)) {
        Vertex nb = base.edge(e).other(cur);
        if (depth[static_cast<std::size_t>(nb)] >= 0) continue;
        depth[static_cast<std::size_t>(nb)] = depth[static_cast<std::size_t>(cur)] + 1;
        parent[static_cast<std::size_t>(nb)] = cur;
        parent_edge[static_cast<std::size_t>(nb)] = e;
        tree_edge[static_cast<std::size_t>(e)] = 1;
        queue.push_back(nb);
      }
    }
  }
  for (EdgeId e = 0; e < base.edge_count(); ++e) {
    if (tree_edge[static_cast<std::size_t>(e)]) continue;
    Vertex u = base.edge(e).u, v = base.edge(e).v;
    std::vector<Vertex> up_u{u}, up_v{v};
    Vertex a = u, b = v;
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)]) {
        a = parent[static_cast<std::size_t>(a)];
        up_u.push_back(a);
      } else {
        b = parent[static_cast<std::size_t>(b)];
        up_v.push_back(b);
      }
    }
    // vertex sequence u .. lca .. v, closed by the non-tree edge {v,u}
    std::vector<Vertex> verts(up_u.begin(), up_u.end());
    for (auto it = up_v.rbegin(); it != up_v.rend(); ++it)
      if (*it != verts.back()) verts.push_back(*it);
    if (verts.size() < 3) continue;
    std::vector<EdgeId> edges;
    for (std::size_t i = 0; i + 1 < verts.size(); ++i)
      edges.push_back(base.edge_id(verts[i], verts[i + 1]));
    edges.push_back(e);
    cycles_.push_back(std::move(edges));
    cycle_verts_.push_back(std::move(verts));
  }

  // Move mix; cycle moves only when a cycle basis exists.
  move_weights_.assign(static_cast<std::size_t>(kMoveTypeCount), 0.0);
  auto set = [this](MoveType t, double wgt) { move_weights_[static_cast<std::size_t>(t)] = wgt; };
  set(MoveType::InsertOrigPair, 0.10);
  set(MoveType::DeleteOrigPair, 0.10);
  set(MoveType::InsertGhostPair, 0.10);
  set(MoveType::DeleteGhostPair, 0.10);
  set(MoveType::InsertWalk, 0.10);
  set(MoveType::DeleteWalk, 0.10);
  set(MoveType::Repair, 0.20);
  set(MoveType::Transplant, 0.05);
  set(MoveType::Shuffle, 0.05);
  if (!cycles_.empty()) {
    set(MoveType::InsertCycle, 0.05);
    set(MoveType::DeleteCycle, 0.05);
  } else {
    set(MoveType::Repair, 0.30);
  }
}

double WormChain::site_delta(Vertex x, int change) const {
  int n = local_time_[static_cast<std::size_t>(x)];
  return site_weight_log(n + change, params_.n_colours, params_.u_tilt) -
         site_weight_log(n, params_.n_colours, params_.u_tilt);
}

bool WormChain::metropolis(double delta_log_mu, double log_proposal_ratio) {
  double log_alpha = delta_log_mu + log_proposal_ratio;
  if (log_alpha >= 0.0) return true;
  if (log_alpha == kNegInf) return false;
  return rng_.uniform() < std::exp(log_alpha);
}

void WormChain::apply_insert_orig_pair(EdgeId e, int colour) {
  Edge ed = g_->base().edge(e);
  int m = config_.m(e);
  push_link(config_, e, colour);
  push_link(config_, e, colour);
  pair_links_at(*g_, config_, ed.u, Link{e, m}, Link{e, m + 1});
  pair_links_at(*g_, config_, ed.v, Link{e, m}, Link{e, m + 1});
  log_weight_ += 2.0 * std::log(params_.beta_for(e)) - std::log((m + 1.0) * (m + 2.0)) +
                 site_delta(ed.u, +1) + site_delta(ed.v, +1);
  local_time_[static_cast<std::size_t>(ed.u)] += 1;
  local_time_[static_cast<std::size_t>(ed.v)] += 1;
}

void WormChain::apply_delete_orig_pair(EdgeId e) {
  Edge ed = g_->base().edge(e);
  int m = config_.m(e);
  log_weight_ += -2.0 * std::log(params_.beta_for(e)) + std::log((m - 1.0) * m) +
                 site_delta(ed.u, -1) + site_delta(ed.v, -1);
  local_time_[static_cast<std::size_t>(ed.u)] -= 1;
  local_time_[static_cast<std::size_t>(ed.v)] -= 1;
  unpair_link_at(*g_, config_, ed.u, Link{e, m - 1});
  unpair_link_at(*g_, config_, ed.v, Link{e, m - 1});
  pop_link(config_, e);
  pop_link(config_, e);
}

void WormChain::apply_insert_ghost_pair(Vertex x) {
  EdgeId e = g_->ghost_edge(x);
  int m = config_.m(e);
  push_link(config_, e, params_.n_colours);
  push_link(config_, e, params_.n_colours);
  pair_links_at(*g_, config_, x, Link{e, m}, Link{e, m + 1});
  log_weight_ += 2.0 * std::log(params_.abs_h()) - std::log((m + 1.0) * (m + 2.0)) + site_delta(x, +1);
  local_time_[static_cast<std::size_t>(x)] += 1;
}

void WormChain::apply_delete_ghost_pair(Vertex x) {
  EdgeId e = g_->ghost_edge(x);
  int m = config_.m(e);
  log_weight_ += -2.0 * std::log(params_.abs_h()) + std::log((m - 1.0) * m) + site_delta(x, -1);
  local_time_[static_cast<std::size_t>(x)] -= 1;
  unpair_link_at(*g_, config_, x, Link{e, m - 1});
  pop_link(config_, e);
  pop_link(config_, e);
}

void WormChain::apply_insert_walk(EdgeId e) {
  Edge ed = g_->base().edge(e);
  EdgeId gu = g_->ghost_edge(ed.u), gv = g_->ghost_edge(ed.v);
  int me = config_.m(e), mu = config_.m(gu), mv = config_.m(gv);
  push_link(config_, gu, params_.n_colours);
  push_link(config_, e, params_.n_colours);
  push_link(config_, gv, params_.n_colours);
  pair_links_at(*g_, config_, ed.u, Link{gu, mu}, Link{e, me});
  pair_links_at(*g_, config_, ed.v, Link{e, me}, Link{gv, mv});
  log_weight_ += 2.0 * std::log(params_.abs_h()) + std::log(params_.beta_for(e)) -
                 std::log(mu + 1.0) - std::log(me + 1.0) - std::log(mv + 1.0) +
                 site_delta(ed.u, +1) + site_delta(ed.v, +1);
  local_time_[static_cast<std::size_t>(ed.u)] += 1;
  local_time_[static_cast<std::size_t>(ed.v)] += 1;
}

void WormChain::apply_delete_walk(EdgeId e) {
  Edge ed = g_->base().edge(e);
  EdgeId gu = g_->ghost_edge(ed.u), gv = g_->ghost_edge(ed.v);
  int me = config_.m(e), mu = config_.m(gu), mv = config_.m(gv);
  log_weight_ += -2.0 * std::log(params_.abs_h()) - std::log(params_.beta_for(e)) +
                 std::log(static_cast<double>(mu)) + std::log(static_cast<double>(me)) +
                 std::log(static_cast<double>(mv)) + site_delta(ed.u, -1) + site_delta(ed.v, -1);
  local_time_[static_cast<std::size_t>(ed.u)] -= 1;
  local_time_[static_cast<std::size_t>(ed.v)] -= 1;
  unpair_link_at(*g_, config_, ed.u, Link{e, me - 1});
  unpair_link_at(*g_, config_, ed.v, Link{e, me - 1});
  pop_link(config_, e);
  pop_link(config_, gu);
  pop_link(config_, gv);
}

void WormChain::apply_insert_cycle(int cycle_index, int colour) {
  const auto& edges = cycles_[static_cast<std::size_t>(cycle_index)];
  const auto& verts = cycle_verts_[static_cast<std::size_t>(cycle_index)];
  const std::size_t len = edges.size();
  std::vector<Link> inserted(len);
  for (std::size_t i = 0; i < len; ++i) {
    int m = config_.m(edges[i]);
    push_link(config_, edges[i], colour);
    inserted[i] = Link{edges[i], m};
    log_weight_ += std::log(params_.beta_for(edges[i])) - std::log(m + 1.0);
  }
  // E_{i-1} and E_i meet at V_i; E_{len-1} closes back at V_0.
  for (std::size_t i = 0; i < len; ++i) {
    Vertex at = verts[i];
    pair_links_at(*g_, config_, at, inserted[(i + len - 1) % len], inserted[i]);
    log_weight_ += site_delta(at, +1);
    local_time_[static_cast<std::size_t>(at)] += 1;
  }
}

void WormChain::apply_delete_cycle(int cycle_index) {
  const auto& edges = cycles_[static_cast<std::size_t>(cycle_index)];
  const auto& verts = cycle_verts_[static_cast<std::size_t>(cycle_index)];
  const std::size_t len = edges.size();
  for (std::size_t i = 0; i < len; ++i) {
    Vertex at = verts[i];
    log_weight_ += site_delta(at, -1);
    local_time_[static_cast<std::size_t>(at)] -= 1;
    unpair_link_at(*g_, config_, at, Link{edges[i], config_.m(edges[i]) - 1});
  }
  for (std::size_t i = 0; i < len; ++i) {
    log_weight_ += -std::log(params_.beta_for(edges[i])) + std::log(static_cast<double>(config_.m(edges[i])));
    pop_link(config_, edges[i]);
  }
}

void WormChain::apply_transplant(EdgeId from, EdgeId to) {
  int colour = config_.colours[static_cast<std::size_t>(from)].back();
  apply_delete_orig_pair(from);
  apply_insert_orig_pair(to, colour);
}

bool WormChain::deletable_pair_at_end(EdgeId e) const {
  int m = config_.m(e);
  if (m < 2) return false;
  Link a{e, m - 2}, b{e, m - 1};
  if (config_.colour(a) != config_.colour(b)) return false;
  return config_.partner_at(a, 0) == b && config_.partner_at(a, 1) == b;
}

bool WormChain::deletable_walk_at_end(EdgeId e) const {
  Edge ed = g_->base().edge(e);
  EdgeId gu = g_->ghost_edge(ed.u), gv = g_->ghost_edge(ed.v);
  int me = config_.m(e), mu = config_.m(gu), mv = config_.m(gv);
  if (me < 1 || mu < 1 || mv < 1) return false;
  Link l{e, me - 1}, a{gu, mu - 1}, b{gv, mv - 1};
  if (config_.colour(l) != params_.n_colours) return false;
  int su = edge_side(*g_, e, ed.u), sv = edge_side(*g_, e, ed.v);
  return config_.partner_at(l, su) == a && config_.partner_at(l, sv) == b &&
         config_.partner_at(a, 0) == l && config_.partner_at(b, 0) == l;
}

bool WormChain::deletable_cycle_at_end(int cycle_index, int* colour_out) const {
  const auto& edges = cycles_[static_cast<std::size_t>(cycle_index)];
  const auto& verts = cycle_verts_[static_cast<std::size_t>(cycle_index)];
  const std::size_t len = edges.size();
  std::vector<Link> last(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (config_.m(edges[i]) < 1) return false;
    last[i] = Link{edges[i], config_.m(edges[i]) - 1};
  }
  int colour = config_.colour(last[0]);
  for (std::size_t i = 0; i < len; ++i) {
    if (config_.colour(last[i]) != colour) return false;
    Vertex at = verts[i];
    Link prev = last[(i + len - 1) % len];
    if (!(config_.partner_at(last[i], edge_side(*g_, last[i].edge, at)) == prev)) return false;
  }
  if (colour_out) *colour_out = colour;
  return true;
}

void WormChain::propose(MoveType t) {
  stats_.proposed[static_cast<std::size_t>(t)] += 1;
  const Graph& base = g_->base();
  const int ne = base.edge_count();
  const int n = base.vertex_count();
  switch (t) {
    case MoveType::InsertOrigPair: {
      if (ne == 0) return;
      EdgeId e = rng_.below_int(ne);
      int colour = 1 + rng_.below_int(params_.n_colours);
      int m = config_.m(e);
      if (m + 2 > params_.cap_orig || params_.beta_for(e) <= 0.0) return;
      Edge ed = base.edge(e);
      double delta = 2.0 * std::log(params_.beta_for(e)) - std::log((m + 1.0) * (m + 2.0)) +
                     site_delta(ed.u, +1) + site_delta(ed.v, +1);
      if (!metropolis(delta, std::log(static_cast<double>(params_.n_colours)))) return;
      apply_insert_orig_pair(e, colour);
      break;
    }
    case MoveType::DeleteOrigPair: {
      if (ne == 0) return;
      EdgeId e = rng_.below_int(ne);
      if (!deletable_pair_at_end(e)) return;
      int m = config_.m(e);
      Edge ed = base.edge(e);
      double delta = -2.0 * std::log(params_.beta_for(e)) + std::log((m - 1.0) * m) +
                     site_delta(ed.u, -1) + site_delta(ed.v, -1);
      if (!metropolis(delta, -std::log(static_cast<double>(params_.n_colours)))) return;
      apply_delete_orig_pair(e);
      break;
    }
    case MoveType::InsertGhostPair: {
      Vertex x = rng_.below_int(n);
      int m = config_.m(g_->ghost_edge(x));
      if (params_.abs_h() <= 0.0 || m + 2 > params_.cap_ghost) return;
      double delta = 2.0 * std::log(params_.abs_h()) - std::log((m + 1.0) * (m + 2.0)) + site_delta(x, +1);
      if (!metropolis(delta, 0.0)) return;
      apply_insert_ghost_pair(x);
      break;
    }
    case MoveType::DeleteGhostPair: {
      Vertex x = rng_.below_int(n);
      EdgeId e = g_->ghost_edge(x);
      int m = config_.m(e);
      if (m < 2) return;
      Link a{e, m - 2}, b{e, m - 1};
      if (!(config_.partner_at(a, 0) == b)) return;
      double delta = -2.0 * std::log(params_.abs_h()) + std::log((m - 1.0) * m) + site_delta(x, -1);
      if (!metropolis(delta, 0.0)) return;
      apply_delete_ghost_pair(x);
      break;
    }
    case MoveType::InsertWalk: {
      if (ne == 0) return;
      EdgeId e = rng_.below_int(ne);
      Edge ed = base.edge(e);
      int me = config_.m(e);
      int mu = config_.m(g_->ghost_edge(ed.u)), mv = config_.m(g_->ghost_edge(ed.v));
      if (params_.abs_h() <= 0.0 || params_.beta_for(e) <= 0.0) return;
      if (me + 1 > params_.cap_orig || mu + 1 > params_.cap_ghost || mv + 1 > params_.cap_ghost) return;
      double delta = 2.0 * std::log(params_.abs_h()) + std::log(params_.beta_for(e)) -
                     std::log(mu + 1.0) - std::log(me + 1.0) - std::log(mv + 1.0) +
                     site_delta(ed.u, +1) + site_delta(ed.v, +1);
      if (!metropolis(delta, 0.0)) return;
      apply_insert_walk(e);
      break;
    }
    case MoveType::DeleteWalk: {
      if (ne == 0) return;
      EdgeId e = rng_.below_int(ne);
      if (!deletable_walk_at_end(e)) return;
      Edge ed = base.edge(e);
      int me = config_.m(e);
      int mu = config_.m(g_->ghost_edge(ed.u)), mv = config_.m(g_->ghost_edge(ed.v));
      double delta = -2.0 * std::log(params_.abs_h()) - std::log(params_.beta_for(e)) +
                     std::log(static_cast<double>(mu)) + std::log(static_cast<double>(me)) +
                     std::log(static_cast<double>(mv)) + site_delta(ed.u, -1) + site_delta(ed.v, -1);
      if (!metropolis(delta, 0.0)) return;
      apply_delete_walk(e);
      break;
    }
    case MoveType::InsertCycle: {
      if (cycles_.empty()) return;
      int ci = rng_.below_int(static_cast<int>(cycles_.size()));
      int colour = 1 + rng_.below_int(params_.n_colours);
      const auto& edges = cycles_[static_cast<std::size_t>(ci)];
      const auto& verts = cycle_verts_[static_cast<std::size_t>(ci)];
      double delta = 0.0;
      for (EdgeId e : edges) {
        if (config_.m(e) + 1 > params_.cap_orig || params_.beta_for(e) <= 0.0) return;
        delta += std::log(params_.beta_for(e)) - std::log(config_.m(e) + 1.0);
      }
      for (Vertex x : verts) delta += site_delta(x, +1);
      if (!metropolis(delta, 0.0)) return;
      apply_insert_cycle(ci, colour);
      break;
    }
    case MoveType::DeleteCycle: {
      if (cycles_.empty()) return;
      int ci = rng_.below_int(static_cast<int>(cycles_.size()));
      if (!deletable_cycle_at_end(ci)) return;
      const auto& edges = cycles_[static_cast<std::size_t>(ci)];
      const auto& verts = cycle_verts_[static_cast<std::size_t>(ci)];
      double delta = 0.0;
      for (EdgeId e : edges)
        delta += -std::log(params_.beta_for(e)) + std::log(static_cast<double>(config_.m(e)));
      for (Vertex x : verts) delta += site_delta(x, -1);
      if (!metropolis(delta, 0.0)) return;
      apply_delete_cycle(ci);
      break;
    }
    case MoveType::Repair: {
      Vertex x = rng_.below_int(n);
      int colour = 1 + rng_.below_int(params_.n_colours);
      std::vector<std::pair<Link, Link>> pairs;
      for (EdgeId e : g_->incident_edges(x)) {
        int side = edge_side(*g_, e, x);
        for (int p = 0; p < config_.m(e); ++p) {
          Link a{e, p};
          if (config_.colour(a) != colour) continue;
          Link b = config_.partner_at(a, side);
          if (b.valid() && a < b) pairs.emplace_back(a, b);
        }
      }
      if (pairs.size() < 2) return;
      int j1 = rng_.below_int(static_cast<int>(pairs.size()));
      int j2 = rng_.below_int(static_cast<int>(pairs.size()) - 1);
      if (j2 >= j1) ++j2;
      auto [a, b] = pairs[static_cast<std::size_t>(j1)];
      auto [c, d] = pairs[static_cast<std::size_t>(j2)];
      unpair_link_at(*g_, config_, x, a);
      unpair_link_at(*g_, config_, x, c);
      if (rng_.below(2) == 0) {
        pair_links_at(*g_, config_, x, a, c);
        pair_links_at(*g_, config_, x, b, d);
      } else {
        pair_links_at(*g_, config_, x, a, d);
        pair_links_at(*g_, config_, x, b, c);
      }
      break;
    }
    case MoveType::Transplant: {
      Vertex x = rng_.below_int(n);
      const auto& inc = base.incident_edges(x);
      if (inc.size() < 2) return;
      int i1 = rng_.below_int(static_cast<int>(inc.size()));
      int i2 = rng_.below_int(static_cast<int>(inc.size()) - 1);
      if (i2 >= i1) ++i2;
      EdgeId from = inc[static_cast<std::size_t>(i1)], to = inc[static_cast<std::size_t>(i2)];
      if (!deletable_pair_at_end(from)) return;
      if (config_.m(to) + 2 > params_.cap_orig || params_.beta_for(to) <= 0.0) return;
      int m1 = config_.m(from), m2 = config_.m(to);
      Vertex a = base.edge(from).other(x), z = base.edge(to).other(x);
      double delta = 2.0 * std::log(params_.beta_for(to)) - 2.0 * std::log(params_.beta_for(from)) +
                     std::log((m1 - 1.0) * m1) - std::log((m2 + 1.0) * (m2 + 2.0)) +
                     site_delta(a, -1) + site_delta(z, +1);
      if (!metropolis(delta, 0.0)) return;
      apply_transplant(from, to);
      break;
    }
    case MoveType::Shuffle: {
      EdgeId e = rng_.below_int(g_->total_edge_count());
      int m = config_.m(e);
      if (m < 2) return;
      int p = rng_.below_int(m);
      int q = rng_.below_int(m - 1);
      if (q >= p) ++q;
      auto rl = [e, p, q](Link t) {
        if (t.edge == e && t.index == p) return Link{e, q};
        if (t.edge == e && t.index == q) return Link{e, p};
        return t;
      };
      auto& cols = config_.colours[static_cast<std::size_t>(e)];
      auto& prt = config_.partner[static_cast<std::size_t>(e)];
      std::swap(cols[static_cast<std::size_t>(p)], cols[static_cast<std::size_t>(q)]);
      std::array<Link, 2> old_p = prt[static_cast<std::size_t>(p)], old_q = prt[static_cast<std::size_t>(q)];
      prt[static_cast<std::size_t>(p)] = {rl(old_q[0]), rl(old_q[1])};
      prt[static_cast<std::size_t>(q)] = {rl(old_p[0]), rl(old_p[1])};
      Edge ed = g_->edge(e);
      for (int side = 0; side < 2; ++side) {
        Vertex at = side == 0 ? ed.u : ed.v;
        for (auto [owner_new, t] : {std::pair{Link{e, q}, old_p[static_cast<std::size_t>(side)]},
                                    std::pair{Link{e, p}, old_q[static_cast<std::size_t>(side)]}}) {
          if (!t.valid() || (t.edge == e && (t.index == p || t.index == q))) continue;
          config_.partner[static_cast<std::size_t>(t.edge)][static_cast<std::size_t>(t.index)]
                         [static_cast<std::size_t>(edge_side(*g_, t.edge, at))] = owner_new;
        }
      }
      break;
    }
  }
  stats_.accepted[static_cast<std::size_t>(t)] += 1;
}

void WormChain::step() {
  int t = rng_.discrete(move_weights_);
  propose(static_cast<MoveType>(t));
}

void WormChain::steps(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) step();
}

void WormChain::check_cache() const {
  LocalTimes lt = local_times(*g_, config_);
  for (Vertex x = 0; x < g_->original_vertex_count(); ++x)
    require(lt.at(x) == local_time_[static_cast<std::size_t>(x)], Errc::InvalidState,
            "local-time cache out of sync");
  double lw = config_log_weight(*g_, config_, params_);
  require(std::abs(lw - log_weight_) <= 1e-8 * std::max(1.0, std::abs(lw)), Errc::InvalidState,
          "log-weight cache out of sync");
}

double Observable::evaluate(const ExtendedGraph& g, const WireConfig& w, const LocalTimes& lt) const {
  switch (kind) {
    case Kind::WalkCount:
      return static_cast<double>(count_mxy(g, w, x, y));
    case Kind::GhostLinks:
      return static_cast<double>(w.m(g.ghost_edge(z)));
    case Kind::AllLocalTimesGeq: {
      for (Vertex v : a)
        if (lt.at(v) < k) return 0.0;
      return 1.0;
    }
    case Kind::GhostLinksTimesInd: {
      for (Vertex v : a)
        if (lt.at(v) < k) return 0.0;
      return static_cast<double>(w.m(g.ghost_edge(z)));
    }
    case Kind::PathEvent: {
      // DFS over self-avoiding x->y paths in the original graph; accept as
      // soon as one path has >= eps * (vertex count) vertices of local time
      // above k.
      const Graph& base = g.base();
      std::vector<char> visited(static_cast<std::size_t>(base.vertex_count()), 0);
      bool found = false;
      std::function<void(Vertex, int, int)> dfs = [&](Vertex cur, int len, int high) {
        if (found) return;
        if (cur == y) {
          if (high >= eps * len - 1e-12) found = true;
          return;
        }
        for (Vertex nb : base.neighbours(cur)) {
          if (visited[static_cast<std::size_t>(nb)]) continue;
          visited[static_cast<std::size_t>(nb)] = 1;
          dfs(nb, len + 1, high + (lt.at(nb) > k ? 1 : 0));
          visited[static_cast<std::size_t>(nb)] = 0;
        }
      };
      visited[static_cast<std::size_t>(x)] = 1;
      dfs(x, 1, lt.at(x) > k ? 1 : 0);
      return found ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

std::vector<McmcEstimate> mcmc_estimate(const ExtendedGraph& g, const ModelParams& params,
                                        const std::vector<Observable>& observables,
                                        const McmcSchedule& schedule, std::uint64_t seed,
                                        const SampleHook& hook) {
  WormChain chain(g, params, seed);
  chain.steps(schedule.burn_in);
  const std::uint64_t n_samples = schedule.steps / static_cast<std::uint64_t>(schedule.thin);
  std::vector<std::vector<double>> samples(observables.size());
  for (auto& s : samples) s.reserve(static_cast<std::size_t>(n_samples));
  std::vector<double> row(observables.size());
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    chain.steps(static_cast<std::uint64_t>(schedule.thin));
    LocalTimes lt = local_times(g, chain.config());
    for (std::size_t i = 0; i < observables.size(); ++i) {
      row[i] = observables[i].evaluate(g, chain.config(), lt);
      samples[i].push_back(row[i]);
    }
    if (hook) hook(schedule.burn_in + (s + 1) * static_cast<std::uint64_t>(schedule.thin), row,
                   chain.config());
  }

  std::vector<McmcEstimate> out;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const auto& xs = samples[i];
    McmcEstimate est;
    est.name = observables[i].name.empty() ? "obs" + std::to_string(i) : observables[i].name;
    est.samples = xs.size();
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    est.mean = mean;
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, xs.size() - 1);

    const int n_batches = static_cast<int>(std::min<std::size_t>(64, xs.size()));
    const std::size_t bs = xs.size() / static_cast<std::size_t>(n_batches);
    double bm_var = 0.0;
    std::vector<double> bmeans;
    for (int b = 0; b < n_batches; ++b) {
      double bm = 0.0;
      for (std::size_t j = static_cast<std::size_t>(b) * bs; j < static_cast<std::size_t>(b + 1) * bs; ++j)
        bm += xs[j];
      bmeans.push_back(bm / static_cast<double>(bs));
    }
    double bmean = 0.0;
    for (double v : bmeans) bmean += v;
    bmean /= static_cast<double>(n_batches);
    for (double v : bmeans) bm_var += (v - bmean) * (v - bmean);
    bm_var /= std::max(1, n_batches - 1);
    est.stderr_ = std::sqrt(bm_var / n_batches);
    est.iat = var > 0.0 ? std::max(1.0, static_cast<double>(bs) * bm_var / var) : 1.0;
    if (var > 0.0 && est.iat > schedule.max_iat_fraction * static_cast<double>(xs.size()))
      fail(Errc::NotEquilibrated,
           est.name + ": integrated autocorrelation time exceeds the schedule budget");
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace spinpath
