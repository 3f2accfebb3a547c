// Acceptance suite: one line per criterion, exit code = number of failures.
//
// Each criterion pins its tolerances in code; sizes are chosen so the whole
// suite runs on one core in a few minutes.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spinpath/experiments.hpp"

using namespace spinpath;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] C%02d %s  (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

ModelParams params(int n, double beta, double h, int cap, int capg) {
  ModelParams p;
  p.n_colours = n;
  p.beta = beta;
  p.h = h;
  p.cap_orig = cap;
  p.cap_ghost = capg;
  return p;
}

// --- C1: representation equivalence -----------------------------------------
void criterion_1() {
  bool pass = true;
  double worst = 0.0;
  std::string worst_at;
  for (int length : {2, 3})
    for (int n : {2, 3})
      for (double beta : {0.2, 0.5})
        for (double h : {0.5, 1.0}) {
          Graph path = make_path(length);
          ExtendedGraph g(path);
          ModelParams p = params(n, beta, h, 8, 8);
          while (truncation_tail_bound(g, p) >= 1e-6 && p.cap_orig < 24) {
            p.cap_orig += 2;
            p.cap_ghost += 2;
          }
          EnumerationSpec spec{&g, p};
          double path_side = two_point(spec, 0, length - 1);

          SpinIntegralSpec oracle;
          oracle.graph = &path;
          oracle.params = p;
          oracle.params.cap_orig = kUncapped;
          oracle.params.cap_ghost = kUncapped;
          oracle.observable = {0, length - 1};
          oracle.nodes = n == 2 ? 128 : 48;
          SpinEstimate spin = spin_correlation(oracle);

          double tol = std::max(1e-3, 3.0 * spin.stderr_ + truncation_tail_bound(g, p));
          double diff = std::abs(path_side - spin.estimate);
          if (diff > tol) pass = false;
          if (diff > worst) {
            worst = diff;
            char buf[128];
            std::snprintf(buf, sizeof buf, "P%d N=%d beta=%.1f h=%.1f", length, n, beta, h);
            worst_at = buf;
          }
        }
  char detail[160];
  std::snprintf(detail, sizeof detail, "worst |G - <S1S1>| = %.2e at %s, tol floor 1e-3",
                worst, worst_at.c_str());
  report(1, "representation equivalence (path model vs spin integral)", pass, detail);
}

// --- C2: colour-switch convergence ------------------------------------------
void criterion_2() {
  bool pass = true;
  double worst_final = 0.0;
  for (int length : {2, 3})
    for (int n : {2, 3})
      for (double beta : {0.2, 0.5})
        for (double h : {0.5, 1.0}) {
          ExtendedGraph g(make_path(length));
          EnumerationSpec spec{&g, params(n, beta, h, 2, 2), EnumMode::ExplicitPairings};
          auto rep = verify_colour_switch(spec, 0, length - 1, {2, 3, 4, 6, 8});
          bool dec234 = rep.delta[1] < rep.delta[0] && rep.delta[2] < rep.delta[1];
          if (!dec234 || !(rep.final_delta < 1e-3)) pass = false;
          worst_final = std::max(worst_final, rep.final_delta);
        }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "delta strictly decreasing over caps 2->3->4, worst final delta = %.2e", worst_final);
  report(2, "colour-switch identity converges in the caps", pass, detail);
}

// --- C3: sphere-moment identity + gamma recursion ---------------------------
void criterion_3() {
  Rng rng(2026);
  bool pass = true;
  int checked = 0;
  double worst_pull = 0.0;
  for (int n : {2, 3, 4}) {
    for (int trial = 0; trial < 17 && checked < 50; ++trial) {
      std::vector<int> e(static_cast<std::size_t>(n), 0);
      int total = 1 + rng.below_int(6);
      for (int t = 0; t < total; ++t) e[static_cast<std::size_t>(rng.below_int(n))] += 1;
      double exact = sphere_moment(e);
      double sum = 0.0, sum2 = 0.0;
      const int samples = 200'000;
      std::vector<double> phi(static_cast<std::size_t>(n));
      for (int s = 0; s < samples; ++s) {
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
          phi[static_cast<std::size_t>(i)] = rng.normal();
          norm2 += phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
        }
        double term = 1.0;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k)
            term *= phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)] / norm2;
        sum += term;
        sum2 += term * term;
      }
      double mean = sum / samples;
      double se = std::sqrt(std::max(0.0, sum2 / samples - mean * mean) / samples);
      double pull = se > 0 ? std::abs(mean - exact) / se : 0.0;
      worst_pull = std::max(worst_pull, pull);
      if (std::abs(mean - exact) > 3.0 * se + 1e-12) pass = false;
      ++checked;
    }
  }
  bool recursion_ok = true;
  for (int n = 1; n <= 8; ++n)
    for (int r = 0; r <= 50; ++r) {
      double ratio = site_weight(r + 1, n) / site_weight(r, n);
      double expected = 1.0 / (2.0 * r + n);
      if (std::abs(ratio - expected) > 1e-12 * expected) recursion_ok = false;
    }
  char detail[128];
  std::snprintf(detail, sizeof detail, "%d moment vectors, worst pull %.2f sigma; recursion %s",
                checked, worst_pull, recursion_ok ? "within 1e-12" : "VIOLATED");
  report(3, "sphere-moment closed form vs MC, on-site gamma recursion", pass && recursion_ok, detail);
}

// --- C4: pairing combinatorics ----------------------------------------------
long long brute_pairings(int q, int u) {
  if (q == 0) return u == 0 ? 1 : 0;
  if (u > q) return 0;
  long long total = 0;
  if (u > 0) total += brute_pairings(q - 1, u - 1);
  if (q >= 2) total += (q - 1) * brute_pairings(q - 2, u);
  return total;
}

void criterion_4() {
  bool pass = true;
  for (int q = 0; q <= 10; ++q) {
    if (q % 2 == 0 && count_vertex_pairings(q, 0) != static_cast<double>(brute_pairings(q, 0)))
      pass = false;
    if (q % 2 == 1 && count_vertex_pairings(q, 1) != static_cast<double>(brute_pairings(q, 1)))
      pass = false;
  }
  report(4, "pairing counts match brute-force matching enumeration (q <= 10)", pass,
         "exact integer agreement");
}

// --- C5: MCMC stationarity + mutation detection -----------------------------
struct StationarityInstance {
  std::string name;
  Graph graph;
  ModelParams p;
};

double chain_tv(const ExtendedGraph& g, const ModelParams& chain_params,
                const ConditionalTable& table, std::uint64_t steps, std::uint64_t seed) {
  WormChain chain(g, chain_params, seed);
  chain.steps(50'000);
  std::unordered_map<std::string, std::uint64_t> counts;
  const int thin = 4;
  const std::uint64_t total = steps / thin;
  for (std::uint64_t s = 0; s < total; ++s) {
    chain.steps(thin);
    counts[canonical_key(chain.config())] += 1;
  }
  return tv_distance(counts, total, table);
}

void criterion_5() {
  std::vector<StationarityInstance> matrix;
  matrix.push_back({"K1", Graph::build({}, 1), params(2, 0.0, 0.9, 2, 2)});
  matrix.push_back({"P2", make_path(2), params(2, 0.5, 0.7, 2, 2)});
  matrix.push_back({"P3", make_path(3), params(2, 0.4, 0.6, 2, 2)});
  matrix.push_back({"C3", make_cycle(3), params(2, 0.4, 0.6, 2, 2)});

  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  for (auto& inst : matrix) {
    ExtendedGraph g(inst.graph);
    ConditionalTable table = stationary_table(g, inst.p);
    double tv = chain_tv(g, inst.p, table, 1'000'000, 99);
    if (tv > 0.02) pass = false;
    if (tv > worst) {
      worst = tv;
      worst_name = inst.name;
    }
  }

  // Mutation: the chain runs with the 1%-tilted on-site weight while the
  // table stays clean; the same TV check must now fail.
  ExtendedGraph g(make_path(3));
  ModelParams clean = params(2, 0.4, 0.6, 2, 2);
  ConditionalTable table = stationary_table(g, clean);
  ModelParams tilted = clean;
  tilted.u_tilt = std::log(1.01);
  double tv_mut = chain_tv(g, tilted, table, 1'000'000, 101);
  bool mutation_detected = tv_mut > 0.02;

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "worst clean TV %.4f (%s) <= 0.02; mutated TV %.4f must exceed 0.02", worst,
                worst_name.c_str(), tv_mut);
  report(5, "MCMC law matches exact tables; 1% weight mutation is detected",
         pass && mutation_detected, detail);
}

// --- C6: exploration law ------------------------------------------------------
void criterion_6() {
  struct Inst {
    std::string name;
    Graph graph;
    ModelParams p;
    EdgeData cond;
  };
  std::vector<Inst> matrix;
  {
    Graph k1 = Graph::build({}, 1);
    ExtendedGraph g(k1);
    matrix.push_back({"K1 empty", k1, params(2, 0.0, 0.9, 2, 2), EdgeData::empty(g)});
  }
  {
    Graph p2 = make_path(2);
    ExtendedGraph g(p2);
    EdgeData cond = EdgeData::empty(g);
    cond.m[0] = 1;
    cond.colours[0] = {2};
    matrix.push_back({"P2 one N-link", p2, params(2, 0.6, 0.9, 2, 3), cond});
    EdgeData cond2 = EdgeData::empty(g);
    cond2.m[0] = 2;
    cond2.colours[0] = {1, 1};
    matrix.push_back({"P2 two 1-links", p2, params(2, 0.6, 0.9, 2, 2), cond2});
  }
  bool pass = true;
  double worst = 0.0;
  for (auto& inst : matrix) {
    ExtendedGraph g(inst.graph);
    EnumerationSpec spec{&g, inst.p, EnumMode::ExplicitPairings};
    ConditionalTable table = conditional_distribution(spec, inst.cond);
    Rng root(555);
    std::unordered_map<std::string, std::uint64_t> counts;
    const std::uint64_t total = 100'000;
    for (std::uint64_t t = 0; t < total; ++t) {
      Rng child = root.split(t);
      auto trace = run_sampling_procedure(g, inst.p, inst.cond, 0, 2, child);
      counts[canonical_key(trace.final_config)] += 1;
    }
    double tv = tv_distance(counts, total, table);
    worst = std::max(worst, tv);
    if (tv > 0.02) pass = false;
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "worst TV %.4f over 1e5 traces, bound 0.02", worst);
  report(6, "exploration law equals the exact conditional law", pass, detail);
}

// --- C7 + C8: death bound and domination -------------------------------------
struct TraceBatch {
  std::vector<ExplorationTrace> traces;
  double c6 = 0.0;
};

TraceBatch make_traces(const Graph& base, const ModelParams& p, const EdgeData& cond, int k,
                       std::uint64_t count, std::uint64_t seed) {
  ExtendedGraph g(base);
  TraceBatch batch;
  batch.c6 = constants_chain(p, base.max_degree(), k, 0.1).c6;
  Rng root(seed);
  batch.traces.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t t = 0; t < count; ++t) {
    Rng child = root.split(t);
    batch.traces.push_back(run_sampling_procedure(g, p, cond, 0, k, child));
  }
  return batch;
}

void criterion_7() {
  bool pass = true;
  double worst_margin = 1e9;
  for (int n : {2, 3})
    for (double h : {0.5, 1.0}) {
      Graph p2 = make_path(2);
      ExtendedGraph g2(p2);
      EdgeData cond = EdgeData::empty(g2);
      cond.m[0] = 1;
      cond.colours[0] = {n};
      auto batch = make_traces(p2, params(n, 0.5, h, 2, 6), cond, 2, 20'000, 7'000 + n);
      DeathReport rep = death_statistics(batch.traces, 2, batch.c6);
      worst_margin = std::min(worst_margin, rep.frequency - batch.c6);
      if (!rep.pass) pass = false;
    }
  {
    Graph p3 = make_path(3);
    ExtendedGraph g3(p3);
    EdgeData cond = EdgeData::empty(g3);
    cond.m[0] = 1;
    cond.colours[0] = {2};
    cond.m[1] = 1;
    cond.colours[1] = {2};
    for (double h : {0.5, 1.0}) {
      auto batch = make_traces(p3, params(2, 0.4, h, 2, 6), cond, 2, 20'000, 991);
      DeathReport rep = death_statistics(batch.traces, 2, batch.c6);
      worst_margin = std::min(worst_margin, rep.frequency - batch.c6);
      if (!rep.pass) pass = false;
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "worst (frequency - c6) margin = %+.4f", worst_margin);
  report(7, "conditional death frequency dominates c6 at k-candidate steps", pass, detail);
}

void criterion_8() {
  bool pass = true;
  int total_violations = 0;
  std::vector<int> grid;
  for (int r = 1; r <= 20; ++r) grid.push_back(r);
  {
    Graph p3 = make_path(3);
    ExtendedGraph g3(p3);
    EdgeData cond = EdgeData::empty(g3);
    cond.m[0] = 1;
    cond.colours[0] = {2};
    cond.m[1] = 1;
    cond.colours[1] = {2};
    auto batch = make_traces(p3, params(2, 0.4, 1.0, 2, 6), cond, 2, 10'000, 2024);
    for (int ell : {1, 2, 3}) {
      DominationReport rep = domination_check(batch.traces, batch.c6, ell, grid);
      total_violations += rep.violations;
    }
  }
  {
    Graph p2 = make_path(2);
    ExtendedGraph g2(p2);
    EdgeData cond = EdgeData::empty(g2);
    cond.m[0] = 1;
    cond.colours[0] = {2};
    auto batch = make_traces(p2, params(2, 0.6, 0.8, 2, 6), cond, 2, 10'000, 2025);
    for (int ell : {1, 2, 3}) {
      DominationReport rep = domination_check(batch.traces, batch.c6, ell, grid);
      total_violations += rep.violations;
    }
  }
  pass = total_violations == 0;
  char detail[96];
  std::snprintf(detail, sizeof detail, "%d violations over r in 1..20, ell in {1,2,3}, 1e4 traces",
                total_violations);
  report(8, "between-death gaps dominated by the geometric-sum tail", pass, detail);
}

// --- C9: local-time tail bounds ----------------------------------------------
void criterion_9() {
  TailsConfig cfg;
  cfg.graph = make_path(3);
  cfg.params = params(2, 0.1, 0.3, 4, 6);
  cfg.sets = {{1}, {0, 1}};
  cfg.ks = {8, 10, 12};
  cfg.schedule.burn_in = 10'000;
  cfg.schedule.steps = 1'000'000;
  cfg.schedule.thin = 4;
  cfg.seed = 31;
  TailsReport rep = run_local_time_tails(cfg);
  int eligible = 0;
  for (const auto& row : rep.rows)
    if (!row.vacuous && row.k >= rep.k_nonvacuous) ++eligible;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%d non-vacuous rows (threshold k >= %lld), pass=%d", eligible,
                rep.k_nonvacuous, rep.pass ? 1 : 0);
  report(9, "local-time tails below the c1 chain bounds", rep.pass && eligible > 0, detail);
}

// --- C10: decay + h-scaling ---------------------------------------------------
void criterion_10() {
  DecayConfig cfg;
  cfg.l_min = 2;
  cfg.l_max = 8;
  cfg.params = params(2, 0.4, 1.0, 3, 8);
  DecayReport rep = run_decay(cfg);
  bool decay_ok = rep.monotone_decreasing && rep.fit && rep.fit->rate > 0.0 &&
                  rep.fit->r_squared > 0.98;

  DecayConfig sweep;
  sweep.l_min = 2;
  sweep.l_max = 6;
  sweep.params = params(2, 0.4, 1.0, 3, 8);
  sweep.h_sweep = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  DecayReport swept = run_decay(sweep);
  bool slope_ok = swept.h_scaling_slope && *swept.h_scaling_slope >= 1.5 &&
                  *swept.h_scaling_slope <= 2.5;

  char detail[160];
  std::snprintf(detail, sizeof detail, "c0_hat=%.4f R2=%.4f monotone=%d; h-sweep slope=%.3f in [1.5,2.5]?",
                rep.fit ? rep.fit->rate : -1.0, rep.fit ? rep.fit->r_squared : -1.0,
                rep.monotone_decreasing ? 1 : 0,
                swept.h_scaling_slope ? *swept.h_scaling_slope : -99.0);
  report(10, "exact two-point decay on P_L with h^2-consistent rate scaling", decay_ok && slope_ok,
         detail);
}

// --- C11: constants chain ------------------------------------------------------
void criterion_11() {
  // beta small enough that c1 < 1 at the limit k, keeping c3 positive
  ModelParams p = params(2, 0.05, 0.5, 4, 4);
  bool exact_ok = true;
  for (int k : {1, 2, 5, 9, 15})
    if (constants_chain(p, 2, k, 0.1).c6 * (k + 1.0) != constants_chain(p, 2, k, 0.1).c4_lower)
      exact_ok = false;
  bool monotone_ok = true;
  double prev = constants_chain(p, 2, 1, 0.1).c1;
  for (int k = 2; k <= 30; ++k) {
    double c1 = constants_chain(p, 2, k, 0.1).c1;
    if (!(c1 < prev)) monotone_ok = false;
    prev = c1;
  }
  const int k = 12;
  std::vector<double> ratios;
  for (int j = 1; j <= 10; ++j) {
    ModelParams ph = p;
    ph.h = std::pow(2.0, -j);
    ratios.push_back(constants_chain(ph, 2, k, 0.1).c3 / (ph.h * ph.h));
  }
  bool converges = ratios.back() > 0.0 &&
                   std::abs(ratios[9] - ratios[8]) < 1e-3 * ratios.back() &&
                   std::abs(ratios[8] - ratios[7]) < 4e-3 * ratios.back();
  char detail[128];
  std::snprintf(detail, sizeof detail, "c6*(k+1)=c4 exact=%d, c1 monotone=%d, c3/h^2 -> %.5f",
                exact_ok ? 1 : 0, monotone_ok ? 1 : 0, ratios.back());
  report(11, "explicit constants chain identities and limits", exact_ok && monotone_ok && converges,
         detail);
}

}  // namespace

int main() {
  std::printf("spinpath acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criterion(s) FAILED\n", g_failures);
  return g_failures;
}
