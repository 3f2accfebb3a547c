#include "spinpath/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>

#include "json.hpp"

namespace spinpath {

ClassSpec ClassSpec::open_set(std::vector<Vertex> a) {
  ClassSpec c;
  std::sort(a.begin(), a.end());
  c.open = std::move(a);
  if (c.open.empty())
    c.kind = StateClass::Kind::LoopsOnly;
  else if (c.open.size() == 2)
    c.kind = StateClass::Kind::OpenPair;
  else
    c.kind = StateClass::Kind::OpenSet;
  return c;
}

std::vector<int> ClassSpec::unpaired_one(const ExtendedGraph& g) const {
  std::vector<int> u1(static_cast<std::size_t>(g.original_vertex_count()), 0);
  for (Vertex x : open) {
    g.base().check_vertex(x);
    u1[static_cast<std::size_t>(x)] = 1;
  }
  return u1;
}

namespace {

struct EdgeBranch {
  std::vector<int> counts;  // per colour
  int total;
  double log_weight;
};

// All per-colour count vectors with total <= cap for one original edge.
std::vector<EdgeBranch> edge_branches(double beta, int n_colours, int cap) {
  std::vector<EdgeBranch> out;
  std::vector<int> comp(static_cast<std::size_t>(n_colours), 0);
  const int max_total = beta > 0.0 ? cap : 0;
  std::function<void(int, int, double)> rec = [&](int idx, int used, double logw) {
    if (idx == n_colours) {
      out.push_back(EdgeBranch{comp, used, logw});
      return;
    }
    for (int m = 0; used + m <= max_total; ++m) {
      comp[static_cast<std::size_t>(idx)] = m;
      double w = m == 0 ? 0.0 : m * std::log(beta) - std::lgamma(m + 1.0);
      rec(idx + 1, used + m, logw + w);
      if (beta <= 0.0) break;
    }
    comp[static_cast<std::size_t>(idx)] = 0;
  };
  rec(0, 0, 0.0);
  return out;
}

struct Decision {
  bool ghost;
  EdgeId edge;                     // original edge id (ghost: the vertex)
  Vertex vertex;                   // ghost decisions: the vertex whose ghost edge is decided
  std::vector<Vertex> close_list;  // vertices fully decided after this step
};

// Decision order: vertices in id order; at step v first the original edges to
// lower-id neighbours, then the ghost edge of v. A vertex closes (parity
// check plus pairing and on-site factors) once its last incident edge is
// decided.
std::vector<Decision> build_decisions(const ExtendedGraph& g) {
  const int n = g.original_vertex_count();
  std::vector<Vertex> close_step(static_cast<std::size_t>(n));
  for (Vertex u = 0; u < n; ++u) {
    Vertex last = u;
    for (Vertex nb : g.base().neighbours(u)) last = std::max(last, nb);
    close_step[static_cast<std::size_t>(u)] = last;
  }
  std::vector<Decision> decisions;
  for (Vertex v = 0; v < n; ++v) {
    std::vector<EdgeId> lower;
    for (EdgeId e : g.base().incident_edges(v))
      if (g.base().edge(e).other(v) < v) lower.push_back(e);
    std::sort(lower.begin(), lower.end(), [&g, v](EdgeId a, EdgeId b) {
      return g.base().edge(a).other(v) < g.base().edge(b).other(v);
    });
    for (EdgeId e : lower) decisions.push_back(Decision{false, e, -1, {}});
    Decision ghost{true, -1, v, {}};
    for (Vertex u = 0; u <= v; ++u)
      if (close_step[static_cast<std::size_t>(u)] == v) ghost.close_list.push_back(u);
    decisions.push_back(std::move(ghost));
  }
  return decisions;
}

struct AggregateDfs {
  const ExtendedGraph& g;
  const ModelParams& p;
  std::vector<int> u1;
  std::uint64_t budget;
  const std::function<void(const AggregateView&)>* visit;

  std::vector<Decision> decisions;
  std::vector<std::vector<EdgeBranch>> branches;  // per original edge
  std::vector<double> ghost_logw;                 // per ghost count
  int max_ghost = 0;

  std::vector<std::vector<int>> q_counts;     // [vertex][colour]
  std::vector<std::vector<int>> edge_counts;  // [orig edge][colour]
  std::vector<int> ghost_counts;              // [vertex]
  std::uint64_t terms = 0;
  LogSumExp sum;

  AggregateDfs(const ExtendedGraph& graph, const ModelParams& params, const ClassSpec& cls,
               std::uint64_t budget_limit, const std::function<void(const AggregateView&)>* v)
      : g(graph), p(params), u1(cls.unpaired_one(graph)), budget(budget_limit), visit(v) {
    require(p.capped(), Errc::InfiniteCaps, "enumeration requires finite caps");
    p.validate();
    decisions = build_decisions(g);
    branches.reserve(static_cast<std::size_t>(g.original_edge_count()));
    for (EdgeId e = 0; e < g.original_edge_count(); ++e)
      branches.push_back(edge_branches(p.beta_for(e), p.n_colours, p.cap_orig));
    max_ghost = p.abs_h() > 0.0 ? p.cap_ghost : 0;
    for (int t = 0; t <= max_ghost; ++t)
      ghost_logw.push_back(t == 0 ? 0.0 : t * std::log(p.abs_h()) - std::lgamma(t + 1.0));
    q_counts.assign(static_cast<std::size_t>(g.original_vertex_count()),
                    std::vector<int>(static_cast<std::size_t>(p.n_colours), 0));
    edge_counts.assign(static_cast<std::size_t>(g.original_edge_count()),
                       std::vector<int>(static_cast<std::size_t>(p.n_colours), 0));
    ghost_counts.assign(static_cast<std::size_t>(g.original_vertex_count()), 0);
  }

  // Pairing count and on-site weight of a vertex once all its incident
  // edges are decided; NaN signals a parity violation (prune).
  double close_vertex(Vertex u) const {
    const auto& q = q_counts[static_cast<std::size_t>(u)];
    int q_total = 0, u_total = 0;
    double factor = 0.0;
    for (int i = 0; i < p.n_colours; ++i) {
      int uu = i == 0 ? u1[static_cast<std::size_t>(u)] : 0;
      int qi = q[static_cast<std::size_t>(i)];
      if (qi < uu || (qi - uu) % 2 != 0) return std::numeric_limits<double>::quiet_NaN();
      factor += log_count_vertex_pairings(qi, uu);
      q_total += qi;
      u_total += uu;
    }
    return factor + site_weight_log((q_total + u_total) / 2, p.n_colours, p.u_tilt);
  }

  void run(int first_branch = -1) { descend(0, 0.0, first_branch); }

  void descend(std::size_t di, double logw, int pinned_first) {
    if (di == decisions.size()) {
      ++terms;
      require(terms <= budget, Errc::BudgetExceeded, "enumeration budget exceeded");
      if (visit)
        (*visit)(AggregateView{edge_counts, ghost_counts, logw});
      else
        sum.add(logw);
      return;
    }
    const Decision& d = decisions[di];
    if (!d.ghost) {
      const auto& br = branches[static_cast<std::size_t>(d.edge)];
      Edge ed = g.base().edge(d.edge);
      for (std::size_t bi = 0; bi < br.size(); ++bi) {
        if (di == 0 && pinned_first >= 0 && static_cast<int>(bi) != pinned_first) continue;
        const EdgeBranch& b = br[bi];
        for (int i = 0; i < p.n_colours; ++i) {
          q_counts[static_cast<std::size_t>(ed.u)][static_cast<std::size_t>(i)] += b.counts[static_cast<std::size_t>(i)];
          q_counts[static_cast<std::size_t>(ed.v)][static_cast<std::size_t>(i)] += b.counts[static_cast<std::size_t>(i)];
        }
        edge_counts[static_cast<std::size_t>(d.edge)] = b.counts;
        descend(di + 1, logw + b.log_weight, pinned_first);
        for (int i = 0; i < p.n_colours; ++i) {
          q_counts[static_cast<std::size_t>(ed.u)][static_cast<std::size_t>(i)] -= b.counts[static_cast<std::size_t>(i)];
          q_counts[static_cast<std::size_t>(ed.v)][static_cast<std::size_t>(i)] -= b.counts[static_cast<std::size_t>(i)];
        }
      }
      return;
    }
    auto& qn = q_counts[static_cast<std::size_t>(d.vertex)][static_cast<std::size_t>(p.n_colours - 1)];
    for (int t = 0; t <= max_ghost; ++t) {
      if (di == 0 && pinned_first >= 0 && t != pinned_first) continue;
      qn += t;
      ghost_counts[static_cast<std::size_t>(d.vertex)] = t;
      double extra = ghost_logw[static_cast<std::size_t>(t)];
      bool ok = true;
      for (Vertex u : d.close_list) {
        double f = close_vertex(u);
        if (std::isnan(f)) {
          ok = false;
          break;
        }
        extra += f;
      }
      if (ok) descend(di + 1, logw + extra, pinned_first);
      qn -= t;
    }
    ghost_counts[static_cast<std::size_t>(d.vertex)] = 0;
  }

  int first_branch_count() const {
    if (decisions.empty()) return 0;
    return decisions[0].ghost ? max_ghost + 1 : static_cast<int>(branches[static_cast<std::size_t>(decisions[0].edge)].size());
  }
};

}  // namespace

void for_each_aggregate(const ExtendedGraph& g, const ModelParams& p, const ClassSpec& cls,
                        std::uint64_t budget, const std::function<void(const AggregateView&)>& visit) {
  AggregateDfs dfs(g, p, cls, budget, &visit);
  dfs.run();
}

PartitionResult enumerate_partition(const EnumerationSpec& spec, const ClassSpec& cls) {
  require(spec.graph != nullptr, Errc::UsageError, "enumeration needs a graph");
  const ExtendedGraph& g = *spec.graph;
  if (spec.mode == EnumMode::ExplicitPairings) {
    // Literal route: per-vertex pairings re-counted by enumeration.
    PartitionResult res;
    res.tail_bound = truncation_tail_bound(g, spec.params);
    LogSumExp sum;
    std::uint64_t terms = 0;
    for_each_explicit_config(g, spec.params, cls, spec.budget,
                             [&sum, &terms](const WireConfig&, double logw) {
                               sum.add(logw);
                               ++terms;
                             });
    res.log_z = sum.value();
    res.term_count = terms;
    return res;
  }

  PartitionResult res;
  res.tail_bound = truncation_tail_bound(g, spec.params);
  if (spec.threads <= 1) {
    AggregateDfs dfs(g, spec.params, cls, spec.budget, nullptr);
    dfs.run();
    res.log_z = dfs.sum.value();
    res.term_count = dfs.terms;
    return res;
  }

  // Parallel split over the first decision's branches; partial sums are
  // merged in branch order so the result does not depend on thread count.
  AggregateDfs probe(g, spec.params, cls, spec.budget, nullptr);
  const int nb = probe.first_branch_count();
  std::vector<std::future<std::pair<LogSumExp, std::uint64_t>>> futures;
  futures.reserve(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    futures.push_back(std::async(std::launch::async, [&, b]() {
      AggregateDfs dfs(g, spec.params, cls, spec.budget, nullptr);
      dfs.run(b);
      return std::make_pair(dfs.sum, dfs.terms);
    }));
  }
  LogSumExp total;
  std::uint64_t terms = 0;
  for (auto& f : futures) {
    auto [part, t] = f.get();
    total.merge(part);
    terms += t;
  }
  require(terms <= spec.budget, Errc::BudgetExceeded, "enumeration budget exceeded");
  res.log_z = total.value();
  res.term_count = terms;
  return res;
}

std::string PartitionResult::to_json(const EnumerationSpec& spec) const {
  nlohmann::json j;
  j["log_Z"] = log_z;
  j["term_count"] = term_count;
  j["tail_bound"] = tail_bound;
  j["caps"] = {{"orig", spec.params.cap_orig}, {"ghost", spec.params.cap_ghost}};
  j["params"] = {{"N", spec.params.n_colours}, {"beta", spec.params.beta}, {"h", spec.params.h}};
  j["mode"] = spec.mode == EnumMode::Aggregate ? "aggregate" : "explicit_pairings";
  return j.dump(2);
}

double two_point(const EnumerationSpec& spec, Vertex x, Vertex y) {
  require(x != y, Errc::PreconditionViolated, "two_point needs x != y");
  PartitionResult zxy = enumerate_partition(spec, ClassSpec::open_pair(x, y));
  PartitionResult zl = enumerate_partition(spec, ClassSpec::loops_only());
  if (zxy.log_z == kNegInf) return 0.0;
  return std::exp(zxy.log_z - zl.log_z);
}

// ---------------------------------------------------------------------------
// Expected number of (x,g)-(y,g) extremal N-walks.
//
// Conditional on all link counts, the pairings at distinct vertices are
// independent and uniform, so E[M_xy | counts] = m_{x,g} * P(the walk grown
// from one ghost endpoint at x terminates in a ghost link at y). That
// probability is computed by revealing the uniform pairing along the walk:
// each arrival endpoint pairs uniformly with the endpoints not yet consumed.
// ---------------------------------------------------------------------------
namespace {

struct SlotTable {
  // slot per (vertex, incident original edge) plus one ghost slot per vertex
  std::vector<int> base;                      // slot offset per vertex
  std::vector<std::vector<EdgeId>> edges_at;  // original edges in slot order
  int total = 0;

  explicit SlotTable(const ExtendedGraph& g) {
    const int n = g.original_vertex_count();
    base.resize(static_cast<std::size_t>(n));
    edges_at.resize(static_cast<std::size_t>(n));
    for (Vertex v = 0; v < n; ++v) {
      base[static_cast<std::size_t>(v)] = total;
      edges_at[static_cast<std::size_t>(v)] = g.base().incident_edges(v);
      total += static_cast<int>(edges_at[static_cast<std::size_t>(v)].size()) + 1;
    }
  }
  int slot(Vertex v, int local_index) const { return base[static_cast<std::size_t>(v)] + local_index; }
  int ghost_slot(Vertex v) const {
    return base[static_cast<std::size_t>(v)] + static_cast<int>(edges_at[static_cast<std::size_t>(v)].size());
  }
};

class WalkHitProbability {
 public:
  WalkHitProbability(const ExtendedGraph& g, const SlotTable& slots, Vertex x, Vertex y)
      : g_(g), slots_(slots), x_(x), y_(y) {}

  double operator()(const std::vector<std::vector<int>>& edge_counts,
                    const std::vector<int>& ghost_counts) {
    rem_.assign(static_cast<std::size_t>(slots_.total), 0);
    const int nc = static_cast<int>(edge_counts.empty() ? 0 : edge_counts[0].size());
    for (Vertex v = 0; v < g_.original_vertex_count(); ++v) {
      const auto& inc = slots_.edges_at[static_cast<std::size_t>(v)];
      for (std::size_t k = 0; k < inc.size(); ++k)
        rem_[static_cast<std::size_t>(slots_.slot(v, static_cast<int>(k)))] =
            edge_counts[static_cast<std::size_t>(inc[k])][static_cast<std::size_t>(nc - 1)];
      rem_[static_cast<std::size_t>(slots_.ghost_slot(v))] = ghost_counts[static_cast<std::size_t>(v)];
    }
    if (rem_[static_cast<std::size_t>(slots_.ghost_slot(x_))] == 0) return 0.0;
    memo_.clear();
    rem_[static_cast<std::size_t>(slots_.ghost_slot(x_))] -= 1;
    return arrive(x_);
  }

 private:
  double arrive(Vertex cur) {
    const auto& inc = slots_.edges_at[static_cast<std::size_t>(cur)];
    int total = rem_[static_cast<std::size_t>(slots_.ghost_slot(cur))];
    for (std::size_t k = 0; k < inc.size(); ++k)
      total += rem_[static_cast<std::size_t>(slots_.slot(cur, static_cast<int>(k)))];
    if (total <= 0) return 0.0;

    std::string key;
    key.reserve(rem_.size() + 1);
    key.push_back(static_cast<char>(cur));
    for (int r : rem_) key.push_back(static_cast<char>(r));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    double p = 0.0;
    int gs = slots_.ghost_slot(cur);
    if (cur == y_ && rem_[static_cast<std::size_t>(gs)] > 0)
      p += static_cast<double>(rem_[static_cast<std::size_t>(gs)]) / total;
    for (std::size_t k = 0; k < inc.size(); ++k) {
      int s = slots_.slot(cur, static_cast<int>(k));
      if (rem_[static_cast<std::size_t>(s)] == 0) continue;
      Vertex next = g_.base().edge(inc[k]).other(cur);
      int s_next = -1;
      const auto& ninc = slots_.edges_at[static_cast<std::size_t>(next)];
      for (std::size_t k2 = 0; k2 < ninc.size(); ++k2)
        if (ninc[k2] == inc[k]) s_next = slots_.slot(next, static_cast<int>(k2));
      double prob = static_cast<double>(rem_[static_cast<std::size_t>(s)]) / total;
      rem_[static_cast<std::size_t>(s)] -= 1;
      rem_[static_cast<std::size_t>(s_next)] -= 1;
      p += prob * arrive(next);
      rem_[static_cast<std::size_t>(s)] += 1;
      rem_[static_cast<std::size_t>(s_next)] += 1;
    }
    memo_.emplace(std::move(key), p);
    return p;
  }

  const ExtendedGraph& g_;
  const SlotTable& slots_;
  Vertex x_, y_;
  std::vector<int> rem_;
  std::unordered_map<std::string, double> memo_;
};

}  // namespace

double expected_mxy(const EnumerationSpec& spec, Vertex x, Vertex y) {
  require(spec.mode == EnumMode::ExplicitPairings, Errc::AggregateModeUnsupported,
          "M_xy depends on the pairing topology; use ExplicitPairings mode");
  require(x != y, Errc::PreconditionViolated, "expected_mxy needs x != y");
  const ExtendedGraph& g = *spec.graph;
  if (spec.params.abs_h() == 0.0) return 0.0;
  SlotTable slots(g);
  WalkHitProbability hit(g, slots, x, y);
  LogSumExp z, m_sum;
  for_each_aggregate(g, spec.params, ClassSpec::loops_only(), spec.budget,
                     [&](const AggregateView& view) {
                       z.add(view.log_weight);
                       int tx = view.ghost_counts[static_cast<std::size_t>(x)];
                       if (tx == 0) return;
                       double p = hit(view.edge_counts, view.ghost_counts);
                       if (p <= 0.0) return;
                       m_sum.add(view.log_weight + std::log(tx * p));
                     });
  if (m_sum.empty()) return 0.0;
  return std::exp(m_sum.value() - z.value());
}

double expected_mxy_literal(const EnumerationSpec& spec, Vertex x, Vertex y) {
  require(spec.mode == EnumMode::ExplicitPairings, Errc::AggregateModeUnsupported,
          "M_xy depends on the pairing topology; use ExplicitPairings mode");
  require(x != y, Errc::PreconditionViolated, "expected_mxy needs x != y");
  const ExtendedGraph& g = *spec.graph;
  LogSumExp z, m_sum;
  for_each_explicit_config(g, spec.params, ClassSpec::loops_only(), spec.budget,
                           [&](const WireConfig& w, double logw) {
                             z.add(logw);
                             int m = count_mxy(g, w, x, y);
                             if (m > 0) m_sum.add(logw + std::log(static_cast<double>(m)));
                           });
  if (m_sum.empty()) return 0.0;
  return std::exp(m_sum.value() - z.value());
}

ColourSwitchReport verify_colour_switch(EnumerationSpec spec, Vertex x, Vertex y,
                                        const std::vector<int>& cap_sequence) {
  require(spec.params.abs_h() != 0.0, Errc::FieldZero, "colour-switch check requires h != 0");
  ColourSwitchReport rep;
  for (int cap : cap_sequence) {
    spec.params.cap_orig = cap;
    spec.params.cap_ghost = cap;
    EnumerationSpec agg = spec;
    agg.mode = EnumMode::Aggregate;
    double gxy = two_point(agg, x, y);
    EnumerationSpec expl = spec;
    expl.mode = EnumMode::ExplicitPairings;
    double m = expected_mxy(expl, x, y) / (spec.params.h * spec.params.h);
    rep.caps.push_back(cap);
    rep.two_point_values.push_back(gxy);
    rep.m_over_h2.push_back(m);
    rep.delta.push_back(std::abs(gxy - m));
  }
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.delta.size(); ++i)
    if (!(rep.delta[i] < rep.delta[i - 1])) rep.strictly_decreasing = false;
  rep.final_delta = rep.delta.empty() ? 0.0 : rep.delta.back();
  return rep;
}

std::string ColourSwitchReport::to_json() const {
  nlohmann::json j;
  j["caps"] = caps;
  j["two_point"] = two_point_values;
  j["m_over_h2"] = m_over_h2;
  j["delta"] = delta;
  j["strictly_decreasing"] = strictly_decreasing;
  j["final_delta"] = final_delta;
  return j.dump(2);
}

EdgeData EdgeData::empty(const ExtendedGraph& g) {
  EdgeData d;
  d.m.assign(static_cast<std::size_t>(g.original_edge_count()), 0);
  d.colours.assign(static_cast<std::size_t>(g.original_edge_count()), {});
  return d;
}

std::vector<std::vector<int>> EdgeData::colour_counts(const ExtendedGraph& g, int n_colours) const {
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(g.original_edge_count()),
                                       std::vector<int>(static_cast<std::size_t>(n_colours), 0));
  for (EdgeId e = 0; e < g.original_edge_count(); ++e)
    for (int c : colours[static_cast<std::size_t>(e)])
      counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(c - 1)] += 1;
  return counts;
}

void check_admissible(const ExtendedGraph& g, const EdgeData& data, const ModelParams& p) {
  require(static_cast<int>(data.m.size()) == g.original_edge_count() &&
              data.colours.size() == data.m.size(),
          Errc::InadmissiblePair, "edge data sized to the original edge set");
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    require(static_cast<int>(data.colours[static_cast<std::size_t>(e)].size()) ==
                data.m[static_cast<std::size_t>(e)],
            Errc::InadmissiblePair, "colour list length mismatch");
    require(data.m[static_cast<std::size_t>(e)] <= p.cap_orig, Errc::InadmissiblePair,
            "conditioned counts exceed the original-edge cap");
    for (int c : data.colours[static_cast<std::size_t>(e)])
      require(c >= 1 && c <= p.n_colours, Errc::InadmissiblePair, "colour out of range");
  }
  // Colours below N need even degree everywhere; colour N is completed by
  // ghost links of matching parity.
  auto counts = data.colour_counts(g, p.n_colours);
  for (Vertex v = 0; v < g.original_vertex_count(); ++v)
    for (int i = 0; i + 1 < p.n_colours; ++i) {
      int q = 0;
      for (EdgeId e : g.base().incident_edges(v)) q += counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)];
      require(q % 2 == 0, Errc::InadmissiblePair,
              "odd number of colour-" + std::to_string(i + 1) + " links at vertex " + std::to_string(v));
    }
}

// ---------------------------------------------------------------------------
// Literal pairing enumeration.
// ---------------------------------------------------------------------------
namespace {

struct EndpointLists {
  // per vertex, per colour: (link, side) endpoints
  std::vector<std::vector<std::vector<std::pair<Link, int>>>> at;

  EndpointLists(const ExtendedGraph& g, const WireConfig& w) {
    const int n = g.original_vertex_count();
    at.assign(static_cast<std::size_t>(n),
              std::vector<std::vector<std::pair<Link, int>>>(static_cast<std::size_t>(w.n_colours)));
    for (EdgeId e = 0; e < g.total_edge_count(); ++e) {
      Edge ed = g.edge(e);
      for (int p = 0; p < w.m(e); ++p) {
        int ci = w.colour(Link{e, p}) - 1;
        if (ed.u < n) at[static_cast<std::size_t>(ed.u)][static_cast<std::size_t>(ci)].push_back({Link{e, p}, 0});
        if (ed.v < n) at[static_cast<std::size_t>(ed.v)][static_cast<std::size_t>(ci)].push_back({Link{e, p}, 1});
      }
    }
  }
};

// Enumerate all pairings at the original vertices with the prescribed number
// of unpaired colour-1 endpoints; the ghost endpoints stay unpaired.
void enumerate_pairings(const ExtendedGraph& g, WireConfig& w, const EndpointLists& ends,
                        const std::vector<int>& u1, Vertex v, int colour_idx,
                        const std::function<void(const WireConfig&)>& emit) {
  const int n = g.original_vertex_count();
  if (v == n) {
    emit(w);
    return;
  }
  if (colour_idx == w.n_colours) {
    enumerate_pairings(g, w, ends, u1, v + 1, 0, emit);
    return;
  }
  const auto& pts = ends.at[static_cast<std::size_t>(v)][static_cast<std::size_t>(colour_idx)];
  int unpaired_budget = colour_idx == 0 ? u1[static_cast<std::size_t>(v)] : 0;

  std::function<void(std::size_t, int)> match = [&](std::size_t from, int budget_left) {
    std::size_t first = from;
    while (first < pts.size() &&
           w.partner_at(pts[first].first, pts[first].second).valid())
      ++first;
    // Endpoints marked unpaired keep an invalid partner; track via budget.
    if (first == pts.size()) {
      if (budget_left == 0) enumerate_pairings(g, w, ends, u1, v, colour_idx + 1, emit);
      return;
    }
    auto [la, sa] = pts[first];
    if (budget_left > 0) {
      // leave it unpaired
      match(first + 1, budget_left - 1);
    }
    for (std::size_t j = first + 1; j < pts.size(); ++j) {
      auto [lb, sb] = pts[j];
      if (w.partner_at(lb, sb).valid()) continue;
      w.partner[static_cast<std::size_t>(la.edge)][static_cast<std::size_t>(la.index)][static_cast<std::size_t>(sa)] = lb;
      w.partner[static_cast<std::size_t>(lb.edge)][static_cast<std::size_t>(lb.index)][static_cast<std::size_t>(sb)] = la;
      match(first + 1, budget_left);
      w.partner[static_cast<std::size_t>(la.edge)][static_cast<std::size_t>(la.index)][static_cast<std::size_t>(sa)] = Link{};
      w.partner[static_cast<std::size_t>(lb.edge)][static_cast<std::size_t>(lb.index)][static_cast<std::size_t>(sb)] = Link{};
    }
  };
  // Unpaired-at-earlier-vertex endpoints are indistinguishable from
  // not-yet-assigned ones through partner_at, so the recursion tracks its own
  // frontier: every endpoint at (v, colour) is either assigned here or left
  // unpaired against the budget. Endpoints paired at the *other* end of their
  // link are still free here; partner_at is per side, so the check above is
  // correct for this vertex's side only.
  match(0, unpaired_budget);
}

// Weight common to every pairing completion of a count skeleton: the measure
// depends on pairings only through local times, and those are fixed by the
// counts and the unpaired prescription. -inf flags caps/zero-coupling/parity
// exclusions.
double config_log_weight_counts_only(const ExtendedGraph& g, const WireConfig& w,
                                     const ModelParams& p, const std::vector<int>& u1) {
  double logw = 0.0;
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    int m = w.m(e);
    if (m > p.cap_orig) return kNegInf;
    if (m == 0) continue;
    double b = p.beta_for(e);
    if (b <= 0.0) return kNegInf;
    logw += m * std::log(b) - std::lgamma(m + 1.0);
  }
  const double h = p.abs_h();
  for (Vertex x = 0; x < g.original_vertex_count(); ++x) {
    int m = w.m(g.ghost_edge(x));
    if (m > p.cap_ghost) return kNegInf;
    if (m == 0) continue;
    if (h <= 0.0) return kNegInf;
    logw += m * std::log(h) - std::lgamma(m + 1.0);
  }
  for (Vertex x = 0; x < g.original_vertex_count(); ++x) {
    int q = 0;
    for (EdgeId e : g.incident_edges(x)) q += w.m(e);
    int u = u1[static_cast<std::size_t>(x)];
    if ((q + u) % 2 != 0 || q < u) return kNegInf;
    logw += site_weight_log((q + u) / 2, p.n_colours, p.u_tilt);
  }
  return logw;
}

// Skeleton with given per-edge totals/colour lists and ghost counts.
WireConfig make_skeleton(const ExtendedGraph& g, int n_colours,
                         const std::vector<std::vector<int>>& orig_colours,
                         const std::vector<int>& ghost_counts) {
  WireConfig w = WireConfig::empty(g, n_colours);
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    w.colours[static_cast<std::size_t>(e)] = orig_colours[static_cast<std::size_t>(e)];
    w.partner[static_cast<std::size_t>(e)].assign(orig_colours[static_cast<std::size_t>(e)].size(),
                                                  {Link{}, Link{}});
  }
  for (Vertex v = 0; v < g.original_vertex_count(); ++v) {
    EdgeId e = g.ghost_edge(v);
    w.colours[static_cast<std::size_t>(e)].assign(
        static_cast<std::size_t>(ghost_counts[static_cast<std::size_t>(v)]), n_colours);
    w.partner[static_cast<std::size_t>(e)].assign(
        static_cast<std::size_t>(ghost_counts[static_cast<std::size_t>(v)]), {Link{}, Link{}});
  }
  return w;
}

}  // namespace

void for_each_explicit_config(const ExtendedGraph& g, const ModelParams& p, const ClassSpec& cls,
                              std::uint64_t budget,
                              const std::function<void(const WireConfig&, double)>& visit) {
  require(p.capped(), Errc::InfiniteCaps, "enumeration requires finite caps");
  p.validate();
  const int n = g.original_vertex_count();
  const int ne = g.original_edge_count();
  std::vector<int> u1 = cls.unpaired_one(g);
  std::uint64_t emitted = 0;

  std::vector<std::vector<int>> orig_colours(static_cast<std::size_t>(ne));
  std::vector<int> ghost_counts(static_cast<std::size_t>(n), 0);

  // Colour assignments per edge, then ghost counts, then pairings.
  std::function<void(EdgeId)> colour_rec;
  std::function<void(Vertex)> ghost_rec = [&](Vertex v) {
    if (v == n) {
      WireConfig w = make_skeleton(g, p.n_colours, orig_colours, ghost_counts);
      double logw = config_log_weight_counts_only(g, w, p, u1);
      if (logw == kNegInf) return;
      EndpointLists ends(g, w);
      enumerate_pairings(g, w, ends, u1, 0, 0, [&](const WireConfig& full) {
        ++emitted;
        require(emitted <= budget, Errc::BudgetExceeded, "explicit enumeration budget exceeded");
        visit(full, logw);
      });
      return;
    }
    int max_t = p.abs_h() > 0.0 ? p.cap_ghost : 0;
    for (int t = 0; t <= max_t; ++t) {
      ghost_counts[static_cast<std::size_t>(v)] = t;
      ghost_rec(v + 1);
    }
    ghost_counts[static_cast<std::size_t>(v)] = 0;
  };
  colour_rec = [&](EdgeId e) {
    if (e == ne) {
      ghost_rec(0);
      return;
    }
    int max_m = p.beta_for(e) > 0.0 ? p.cap_orig : 0;
    std::vector<int>& cols = orig_colours[static_cast<std::size_t>(e)];
    std::function<void(int, int)> fill = [&](int m, int idx) {
      if (idx == m) {
        colour_rec(e + 1);
        return;
      }
      for (int c = 1; c <= p.n_colours; ++c) {
        cols[static_cast<std::size_t>(idx)] = c;
        fill(m, idx + 1);
      }
    };
    for (int m = 0; m <= max_m; ++m) {
      cols.assign(static_cast<std::size_t>(m), 1);
      fill(m, 0);
    }
    cols.clear();
  };
  colour_rec(0);
}

ConditionalTable conditional_distribution(const EnumerationSpec& spec, const EdgeData& data) {
  require(spec.graph != nullptr, Errc::UsageError, "needs a graph");
  const ExtendedGraph& g = *spec.graph;
  const ModelParams& p = spec.params;
  require(p.capped(), Errc::InfiniteCaps, "conditional tables require finite caps");
  check_admissible(g, data, p);

  const int n = g.original_vertex_count();
  auto counts = data.colour_counts(g, p.n_colours);
  std::vector<int> qn(static_cast<std::size_t>(n), 0);  // colour-N degree from original edges
  for (Vertex v = 0; v < n; ++v)
    for (EdgeId e : g.base().incident_edges(v))
      qn[static_cast<std::size_t>(v)] += counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(p.n_colours - 1)];

  ConditionalTable table;
  LogSumExp norm;
  std::vector<double> logws;
  std::vector<int> ghost_counts(static_cast<std::size_t>(n), 0);
  std::vector<int> u1(static_cast<std::size_t>(n), 0);
  std::uint64_t emitted = 0;

  std::function<void(Vertex)> ghost_rec = [&](Vertex v) {
    if (v == n) {
      WireConfig w = make_skeleton(g, p.n_colours, data.colours, ghost_counts);
      EndpointLists ends(g, w);
      enumerate_pairings(g, w, ends, u1, 0, 0, [&](const WireConfig& full) {
        ++emitted;
        require(emitted <= spec.budget, Errc::BudgetExceeded, "conditional table budget exceeded");
        double logw = config_log_weight(g, full, p);
        if (logw == kNegInf) return;
        table.configs.push_back(full);
        logws.push_back(logw);
        norm.add(logw);
      });
      return;
    }
    int max_t = p.abs_h() > 0.0 ? p.cap_ghost : 0;
    for (int t = qn[static_cast<std::size_t>(v)] % 2; t <= max_t; t += 2) {
      ghost_counts[static_cast<std::size_t>(v)] = t;
      ghost_rec(v + 1);
    }
    ghost_counts[static_cast<std::size_t>(v)] = 0;
  };
  ghost_rec(0);
  require(!table.configs.empty(), Errc::InadmissiblePair,
          "no completion within the ghost cap has positive weight");

  const double log_norm = norm.value();
  table.prob.reserve(logws.size());
  for (std::size_t i = 0; i < logws.size(); ++i) {
    table.prob.push_back(std::exp(logws[i] - log_norm));
    table.index.emplace(canonical_key(table.configs[i]), static_cast<int>(i));
  }
  return table;
}

}  // namespace spinpath
