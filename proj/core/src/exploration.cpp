#include "spinpath/exploration.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace spinpath {

namespace {

struct WalkOutcome {
  enum class Kind { Escaped, DeadAtGhost } kind;
  Vertex escape = -1;   // Escaped: first unexplored vertex hit
  EdgeId ghost_edge = -1;  // DeadAtGhost: ghost edge carrying the terminal link
};

// Follow the walk containing the given link from the given entry side until
// it leaves the explored region or terminates in an unpaired ghost end.
WalkOutcome trace_from(const PartialExploration& st, Link cur, int entry_side) {
  const ExtendedGraph& g = *st.g;
  while (true) {
    int exit_side = 1 - entry_side;
    Edge ed = g.edge(cur.edge);
    Vertex exit_at = exit_side == 0 ? ed.u : ed.v;
    if (exit_at == g.ghost()) return {WalkOutcome::Kind::DeadAtGhost, -1, cur.edge};
    if (!st.explored[static_cast<std::size_t>(exit_at)])
      return {WalkOutcome::Kind::Escaped, exit_at, -1};
    Link next = st.config.partner_at(cur, exit_side);
    require(next.valid(), Errc::InvalidState, "unpaired endpoint at an explored vertex");
    entry_side = edge_side(g, next.edge, exit_at);
    cur = next;
  }
}

}  // namespace

bool PartialExploration::fully_explored() const {
  for (char e : explored)
    if (!e) return false;
  return true;
}

std::optional<int> selected_walk(const PartialExploration& st, Vertex* escape) {
  const ExtendedGraph& g = *st.g;
  if (st.start < 0 || !st.explored[static_cast<std::size_t>(st.start)]) return std::nullopt;
  EdgeId ge = g.ghost_edge(st.start);
  for (int j = 0; j < st.config.m(ge); ++j) {
    WalkOutcome out = trace_from(st, Link{ge, j}, /*entry at g*/ 1);
    if (out.kind == WalkOutcome::Kind::Escaped) {
      if (escape) *escape = out.escape;
      return j;
    }
  }
  return std::nullopt;
}

Vertex walk_tracking_next(const PartialExploration& st) {
  require(!st.fully_explored(), Errc::ExplorationComplete, "all vertices explored");
  if (!st.explored[static_cast<std::size_t>(st.start)]) return st.start;
  Vertex escape = -1;
  if (selected_walk(st, &escape).has_value()) return escape;
  for (Vertex v = 0; v < st.g->original_vertex_count(); ++v)
    if (!st.explored[static_cast<std::size_t>(v)]) return v;
  fail(Errc::ExplorationComplete, "unreachable");
}

namespace {

// Sample the ghost count at x from its exact conditional law, then a uniform
// per-colour perfect matching of the endpoints at x.
int reveal_vertex(PartialExploration& st, Vertex x, Rng& rng) {
  const ExtendedGraph& g = *st.g;
  const ModelParams& p = st.params;
  const int nc = p.n_colours;

  std::vector<int> q(static_cast<std::size_t>(nc), 0);
  for (EdgeId e : g.base().incident_edges(x))
    for (int c : st.conditioned.colours[static_cast<std::size_t>(e)]) q[static_cast<std::size_t>(c - 1)] += 1;
  int q_total = 0;
  for (int v : q) q_total += v;
  const int qn = q[static_cast<std::size_t>(nc - 1)];

  std::vector<int> counts;
  std::vector<double> weights;
  const double h = p.abs_h();
  const int max_t = h > 0.0 ? p.cap_ghost : 0;
  double best = kNegInf;
  std::vector<double> logws;
  for (int t = qn % 2; t <= max_t; t += 2) {
    double lw = (t == 0 ? 0.0 : t * std::log(h) - std::lgamma(t + 1.0)) +
                log_count_vertex_pairings(qn + t, 0) +
                site_weight_log((q_total + t) / 2, nc, p.u_tilt);
    counts.push_back(t);
    logws.push_back(lw);
    best = std::max(best, lw);
  }
  require(!counts.empty(), Errc::InadmissiblePair, "no ghost completion within the cap");
  weights.reserve(logws.size());
  for (double lw : logws) weights.push_back(std::exp(lw - best));
  int t = counts[static_cast<std::size_t>(rng.discrete(weights))];

  EdgeId ge = g.ghost_edge(x);
  st.config.colours[static_cast<std::size_t>(ge)].assign(static_cast<std::size_t>(t), nc);
  st.config.partner[static_cast<std::size_t>(ge)].assign(static_cast<std::size_t>(t), {Link{}, Link{}});

  // Uniform matching: repeatedly pair the first open endpoint with a
  // uniformly chosen remaining one.
  for (int ci = 1; ci <= nc; ++ci) {
    std::vector<Link> open;
    for (EdgeId e : g.incident_edges(x))
      for (int l = 0; l < st.config.m(e); ++l)
        if (st.config.colour(Link{e, l}) == ci) open.push_back(Link{e, l});
    while (!open.empty()) {
      Link a = open.front();
      open.erase(open.begin());
      require(!open.empty(), Errc::ParityViolation, "odd endpoint count at revelation");
      std::size_t pick = rng.below(open.size());
      Link b = open[pick];
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      int sa = edge_side(g, a.edge, x), sb = edge_side(g, b.edge, x);
      st.config.partner[static_cast<std::size_t>(a.edge)][static_cast<std::size_t>(a.index)][static_cast<std::size_t>(sa)] = b;
      st.config.partner[static_cast<std::size_t>(b.edge)][static_cast<std::size_t>(b.index)][static_cast<std::size_t>(sb)] = a;
    }
  }
  return t;
}

}  // namespace

ExplorationTrace run_sampling_procedure(const ExtendedGraph& g, const ModelParams& params,
                                        const EdgeData& conditioned, Vertex start, int k,
                                        Rng& rng) {
  require(params.cap_ghost != kUncapped, Errc::InfiniteCaps,
          "exploration samples exact finite tables; set a ghost cap");
  check_admissible(g, conditioned, params);
  g.base().check_vertex(start);

  PartialExploration st;
  st.g = &g;
  st.params = params;
  st.conditioned = conditioned;
  st.start = start;
  st.explored.assign(static_cast<std::size_t>(g.original_vertex_count()), 0);
  st.config = WireConfig::empty(g, params.n_colours);
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    st.config.colours[static_cast<std::size_t>(e)] = conditioned.colours[static_cast<std::size_t>(e)];
    st.config.partner[static_cast<std::size_t>(e)].assign(
        conditioned.colours[static_cast<std::size_t>(e)].size(), {Link{}, Link{}});
  }

  ExplorationTrace trace;
  trace.conditioned = conditioned;
  trace.k = k;

  while (!st.fully_explored()) {
    ExplorationStep step;
    std::optional<int> tracked_index;
    Vertex escape = -1;
    if (!st.explored[static_cast<std::size_t>(st.start)]) {
      step.vertex = st.start;
    } else {
      tracked_index = selected_walk(st, &escape);
      if (tracked_index.has_value()) {
        step.vertex = escape;
        step.tracked = true;
      } else {
        step.vertex = walk_tracking_next(st);
      }
    }
    int orig_degree_links = 0;
    for (EdgeId e : g.base().incident_edges(step.vertex))
      orig_degree_links += st.conditioned.m[static_cast<std::size_t>(e)];
    step.k_candidate = orig_degree_links <= k;

    st.explored[static_cast<std::size_t>(step.vertex)] = 1;
    step.revealed_ghost_links = reveal_vertex(st, step.vertex, rng);
    step.k_good = step.k_candidate && step.revealed_ghost_links > 0;

    if (step.tracked) {
      WalkOutcome out = trace_from(st, Link{g.ghost_edge(st.start), *tracked_index}, 1);
      step.walk_died = out.kind == WalkOutcome::Kind::DeadAtGhost &&
                       out.ghost_edge == g.ghost_edge(step.vertex);
    }
    trace.steps.push_back(step);
  }
  trace.final_config = st.config;
  return trace;
}

DeathReport death_statistics(const std::vector<ExplorationTrace>& traces, int k, double c6) {
  DeathReport rep;
  rep.c6 = c6;
  for (const auto& trace : traces)
    for (const auto& step : trace.steps) {
      if (!(step.tracked && step.k_candidate)) continue;
      rep.candidate_steps += 1;
      if (step.walk_died) rep.deaths += 1;
    }
  require(rep.candidate_steps > 0, Errc::NoCandidateSteps,
          "no tracked k-candidate steps observed (k=" + std::to_string(k) + ")");
  const double n = static_cast<double>(rep.candidate_steps);
  const double p = static_cast<double>(rep.deaths) / n;
  rep.frequency = p;
  rep.stderr_ = std::sqrt(std::max(0.0, p * (1.0 - p) / n));
  const double z = 1.959963984540054;
  double denom = 1.0 + z * z / n;
  double centre = (p + z * z / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  rep.wilson_low = centre - half;
  rep.wilson_high = centre + half;
  rep.pass = p >= c6 - 3.0 * rep.stderr_;
  return rep;
}

std::vector<int> death_gaps(const ExplorationTrace& trace, int ell) {
  std::vector<int> gaps;
  int current = 0;
  for (const auto& step : trace.steps) {
    if (!(step.tracked && step.k_candidate)) continue;
    ++current;
    if (step.walk_died) {
      gaps.push_back(current);
      current = 0;
      if (static_cast<int>(gaps.size()) == ell) break;
    }
  }
  if (static_cast<int>(gaps.size()) < ell && current > 0) gaps.push_back(current);
  while (static_cast<int>(gaps.size()) < ell) gaps.push_back(0);
  return gaps;
}

DominationReport domination_check(const std::vector<ExplorationTrace>& traces, double c6, int ell,
                                  const std::vector<int>& r_grid) {
  require(!traces.empty(), Errc::InsufficientData, "no traces");
  DominationReport rep;
  rep.ell = ell;
  rep.c6 = c6;
  rep.r_grid = r_grid;
  std::vector<int> sums;
  sums.reserve(traces.size());
  for (const auto& t : traces) {
    auto gaps = death_gaps(t, ell);
    int s = 0;
    for (int gap : gaps) s += gap;
    sums.push_back(s);
  }
  const double n = static_cast<double>(sums.size());
  for (int r : r_grid) {
    int above = 0;
    for (int s : sums)
      if (s > r) ++above;
    double p = above / n;
    double se = std::sqrt(std::max(p * (1.0 - p) / n, 1e-12));
    double bound = negative_binomial_ccdf(ell, c6, r);
    rep.empirical_ccdf.push_back(p);
    rep.bound_ccdf.push_back(bound);
    rep.stderr_.push_back(se);
    if (p > bound + 3.0 * se) rep.violations += 1;
  }
  return rep;
}

std::string DeathReport::to_json() const {
  nlohmann::json j;
  j["candidate_steps"] = candidate_steps;
  j["deaths"] = deaths;
  j["frequency"] = frequency;
  j["stderr"] = stderr_;
  j["wilson_95"] = {wilson_low, wilson_high};
  j["c6"] = c6;
  j["pass"] = pass;
  return j.dump(2);
}

std::string DominationReport::to_json() const {
  nlohmann::json j;
  j["ell"] = ell;
  j["c6"] = c6;
  j["r"] = r_grid;
  j["empirical_ccdf"] = empirical_ccdf;
  j["bound_ccdf"] = bound_ccdf;
  j["stderr"] = stderr_;
  j["violations"] = violations;
  return j.dump(2);
}

std::string trace_to_jsonl(const ExtendedGraph& g, const ExplorationTrace& trace) {
  std::string out;
  // Rebuild the composed configuration after each step by restricting the
  // final one to the explored prefix: drop ghost links and pairings of
  // not-yet-explored vertices.
  std::vector<char> explored(static_cast<std::size_t>(g.original_vertex_count()), 0);
  for (std::size_t si = 0; si < trace.steps.size(); ++si) {
    const auto& step = trace.steps[si];
    explored[static_cast<std::size_t>(step.vertex)] = 1;
    WireConfig w = trace.final_config;
    for (Vertex v = 0; v < g.original_vertex_count(); ++v) {
      if (explored[static_cast<std::size_t>(v)]) continue;
      EdgeId ge = g.ghost_edge(v);
      w.colours[static_cast<std::size_t>(ge)].clear();
      w.partner[static_cast<std::size_t>(ge)].clear();
      for (EdgeId e : g.incident_edges(v)) {
        if (e == ge) continue;
        int side = edge_side(g, e, v);
        for (int l = 0; l < w.m(e); ++l) {
          Link b = w.partner_at(Link{e, l}, side);
          if (!b.valid()) continue;
          if (b.edge == ge) {
            // partner was a ghost link of v (already cleared): drop both ends
            w.partner[static_cast<std::size_t>(e)][static_cast<std::size_t>(l)][static_cast<std::size_t>(side)] = Link{};
          } else {
            int sb = edge_side(g, b.edge, v);
            w.partner[static_cast<std::size_t>(e)][static_cast<std::size_t>(l)][static_cast<std::size_t>(side)] = Link{};
            w.partner[static_cast<std::size_t>(b.edge)][static_cast<std::size_t>(b.index)][static_cast<std::size_t>(sb)] = Link{};
          }
        }
      }
    }
    nlohmann::json j;
    j["step"] = si;
    j["vertex"] = step.vertex;
    j["revealed_ghost_links"] = step.revealed_ghost_links;
    j["k_candidate"] = step.k_candidate;
    j["k_good"] = step.k_good;
    j["tracked"] = step.tracked;
    j["walk_died"] = step.walk_died;
    j["composed_config"] = nlohmann::json::parse(wire_to_json(g, w));
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace spinpath
