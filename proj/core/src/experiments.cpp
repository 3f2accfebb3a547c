#include "spinpath/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace spinpath {

namespace {

double estimate_two_point(const DecayConfig& cfg, int length, double* stderr_out) {
  Graph path = make_path(length);
  ExtendedGraph g(path);
  const Vertex x = 0, y = length - 1;
  switch (cfg.engine) {
    case Engine::Exact: {
      EnumerationSpec spec{&g, cfg.params, EnumMode::Aggregate, cfg.budget};
      *stderr_out = 0.0;
      return two_point(spec, x, y);
    }
    case Engine::Mcmc: {
      Observable m;
      m.kind = Observable::Kind::WalkCount;
      m.x = x;
      m.y = y;
      m.name = "M";
      auto est = mcmc_estimate(g, cfg.params, {m}, cfg.schedule, cfg.seed + static_cast<std::uint64_t>(length));
      double h2 = cfg.params.h * cfg.params.h;
      *stderr_out = est[0].stderr_ / h2;
      return est[0].mean / h2;
    }
    case Engine::SpinOracle: {
      SpinIntegralSpec spec;
      spec.graph = &path;
      spec.params = cfg.params;
      spec.observable = {x, y};
      spec.method = SpinMethod::ProductQuadrature;
      spec.nodes = cfg.quad_nodes;
      if (cfg.params.cap_orig != kUncapped) {
        spec.interaction = Interaction::Truncated;
        spec.truncation_k = cfg.params.cap_orig;
      }
      SpinEstimate est = spin_correlation(spec);
      *stderr_out = est.stderr_;
      return est.estimate;
    }
  }
  return 0.0;
}

}  // namespace

DecayFit fit_exponential_decay(std::vector<DecayRow>& rows) {
  // Weighted LLS of log(estimate) on distance, sigma_log = stderr/estimate.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int used = 0;
  for (auto& r : rows) {
    r.used_in_fit = r.estimate > 5.0 * r.stderr_ && r.estimate > 0.0;
    if (!r.used_in_fit) continue;
    double sigma = r.stderr_ > 0.0 ? r.stderr_ / r.estimate : 1e-12;
    double w = 1.0 / (sigma * sigma);
    double x = r.distance, y = std::log(r.estimate);
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
    ++used;
  }
  require(used >= 2, Errc::InsufficientSignal, "fewer than two rows above the signal floor");
  double denom = sw * swxx - swx * swx;
  double slope = (sw * swxy - swx * swy) / denom;
  double intercept = (swy * swxx - swx * swxy) / denom;
  double ss_res = 0, ss_tot = 0, ybar = swy / sw;
  for (const auto& r : rows) {
    if (!r.used_in_fit) continue;
    double y = std::log(r.estimate);
    double pred = intercept + slope * r.distance;
    ss_res += (y - pred) * (y - pred);
    ss_tot += (y - ybar) * (y - ybar);
  }
  DecayFit fit;
  fit.rate = -slope;
  fit.log_prefactor = intercept;
  fit.rate_variance = sw / denom;
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points = used;
  return fit;
}

DecayReport run_decay(const DecayConfig& cfg) {
  DecayReport rep;
  if (cfg.params.h == 0.0) {
    rep.note = "h=0: transverse mass-gap statement inapplicable, no fit attempted";
    return rep;
  }
  for (int length = cfg.l_min; length <= cfg.l_max; ++length) {
    DecayRow row;
    row.distance = length - 1;
    row.estimate = estimate_two_point(cfg, length, &row.stderr_);
    rep.rows.push_back(row);
  }
  rep.monotone_decreasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (!(rep.rows[i].estimate < rep.rows[i - 1].estimate)) rep.monotone_decreasing = false;
  rep.fit = fit_exponential_decay(rep.rows);

  if (!cfg.h_sweep.empty()) {
    double swx = 0, swy = 0, swxx = 0, swxy = 0;
    int used = 0;
    for (double h : cfg.h_sweep) {
      DecayConfig sub = cfg;
      sub.h_sweep.clear();
      sub.params.h = h;
      DecayReport r = run_decay(sub);
      if (!r.fit || r.fit->rate <= 0.0) continue;
      rep.rate_vs_h.emplace_back(h, r.fit->rate);
      double lx = std::log(h), ly = std::log(r.fit->rate);
      swx += lx;
      swy += ly;
      swxx += lx * lx;
      swxy += lx * ly;
      ++used;
    }
    if (used >= 2)
      rep.h_scaling_slope = (used * swxy - swx * swy) / (used * swxx - swx * swx);
  }
  return rep;
}

std::string DecayReport::to_json() const {
  nlohmann::json j;
  auto rows_json = nlohmann::json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"distance", r.distance},
                         {"estimate", r.estimate},
                         {"stderr", r.stderr_},
                         {"used_in_fit", r.used_in_fit}});
  j["rows"] = rows_json;
  if (fit) {
    j["fit"] = {{"c0_hat", fit->rate},
                {"log_prefactor", fit->log_prefactor},
                {"rate_variance", fit->rate_variance},
                {"r_squared", fit->r_squared},
                {"points", fit->points}};
  }
  if (!note.empty()) j["note"] = note;
  if (!rate_vs_h.empty()) {
    auto sweep = nlohmann::json::array();
    for (auto [h, rate] : rate_vs_h) sweep.push_back({{"h", h}, {"c0_hat", rate}});
    j["rate_vs_h"] = sweep;
  }
  if (h_scaling_slope) j["h_scaling_slope"] = *h_scaling_slope;
  j["monotone_decreasing"] = monotone_decreasing;
  return j.dump(2);
}

std::string DecayReport::rows_csv() const {
  std::string out = "distance,estimate,stderr,used_in_fit\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d\n", r.distance, r.estimate, r.stderr_,
                  r.used_in_fit ? 1 : 0);
    out += buf;
  }
  return out;
}

TailsReport run_local_time_tails(const TailsConfig& cfg) {
  ExtendedGraph g(cfg.graph);
  const int d_star = cfg.graph.max_degree();
  TailsReport rep;

  std::vector<Observable> obs;
  for (const auto& a : cfg.sets)
    for (int k : cfg.ks) {
      Observable ind;
      ind.kind = Observable::Kind::AllLocalTimesGeq;
      ind.a = a;
      ind.k = k;
      ind.name = "ind";
      obs.push_back(ind);
      Observable gh;
      gh.kind = Observable::Kind::GhostLinksTimesInd;
      gh.a = a;
      gh.z = a.front();
      gh.k = k;
      gh.name = "ghost_ind";
      obs.push_back(gh);
    }
  auto est = mcmc_estimate(g, cfg.params, obs, cfg.schedule, cfg.seed);

  std::size_t oi = 0;
  rep.pass = true;
  for (const auto& a : cfg.sets)
    for (int k : cfg.ks) {
      TailsRow row;
      row.set_a = a;
      row.k = k;
      ConstantsReport cons = constants_chain(cfg.params, d_star, k, cfg.eps);
      row.c1 = cons.c1;
      row.bound = std::pow(cons.c1, static_cast<double>(a.size()));
      row.vacuous = row.bound >= 1.0;
      row.empirical = est[oi].mean;
      row.stderr_ = est[oi].stderr_;
      row.ghost_empirical = est[oi + 1].mean;
      row.ghost_stderr = est[oi + 1].stderr_;
      row.ghost_bound = cfg.params.abs_h() * row.bound;
      oi += 2;
      if (!row.vacuous) {
        bool v1 = row.empirical > row.bound + 3.0 * row.stderr_;
        bool v2 = row.ghost_empirical > row.ghost_bound + 3.0 * row.ghost_stderr;
        row.violation = v1 || v2;
        if (row.violation) rep.pass = false;
      }
      rep.rows.push_back(row);
    }
  for (int k = 0; k <= 400; ++k) {
    if (constants_chain(cfg.params, d_star, k, cfg.eps).c1 < 1.0) {
      rep.k_nonvacuous = k;
      break;
    }
  }
  return rep;
}

std::string TailsReport::to_json() const {
  nlohmann::json j;
  auto rows_json = nlohmann::json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"A", r.set_a},
                         {"k", r.k},
                         {"c1", r.c1},
                         {"bound", r.bound},
                         {"vacuous", r.vacuous},
                         {"empirical", r.empirical},
                         {"stderr", r.stderr_},
                         {"ghost_empirical", r.ghost_empirical},
                         {"ghost_stderr", r.ghost_stderr},
                         {"ghost_bound", r.ghost_bound},
                         {"violation", r.violation}});
  j["rows"] = rows_json;
  j["k_nonvacuous"] = k_nonvacuous;
  j["pass"] = pass;
  return j.dump(2);
}

double tv_distance(const std::unordered_map<std::string, std::uint64_t>& counts,
                   std::uint64_t total, const ConditionalTable& table) {
  double tv = 0.0;
  double seen_mass = 0.0;
  for (std::size_t i = 0; i < table.configs.size(); ++i) {
    const std::string key = canonical_key(table.configs[i]);
    auto it = counts.find(key);
    double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    tv += std::abs(emp - table.prob[i]);
    if (it != counts.end()) seen_mass += emp;
  }
  tv += 1.0 - seen_mass;  // empirical mass on keys outside the table
  return 0.5 * tv;
}

ConditionalTable stationary_table(const ExtendedGraph& g, const ModelParams& params,
                                  std::uint64_t budget) {
  ConditionalTable table;
  LogSumExp norm;
  std::vector<double> logws;
  for_each_explicit_config(g, params, ClassSpec::loops_only(), budget,
                           [&](const WireConfig& w, double logw) {
                             table.configs.push_back(w);
                             logws.push_back(logw);
                             norm.add(logw);
                           });
  double log_norm = norm.value();
  table.prob.reserve(logws.size());
  for (std::size_t i = 0; i < logws.size(); ++i) {
    table.prob.push_back(std::exp(logws[i] - log_norm));
    table.index.emplace(canonical_key(table.configs[i]), static_cast<int>(i));
  }
  return table;
}

namespace {

VerifyCheck check_representation(const VerifyConfig& cfg) {
  VerifyCheck check;
  check.name = "representation_equivalence";
  double worst = 0.0;
  for (int length : {2, 3}) {
    Graph path = make_path(length);
    ExtendedGraph g(path);
    ModelParams p;
    p.n_colours = 2;
    p.beta = 0.5;
    p.h = 1.0;
    p.cap_orig = 8;
    p.cap_ghost = 10;
    if (cfg.mutate) p.u_tilt = cfg.mutation_tilt;
    EnumerationSpec spec{&g, p, EnumMode::Aggregate};
    double path_side = two_point(spec, 0, length - 1);

    SpinIntegralSpec oracle;
    oracle.graph = &path;
    ModelParams clean = p;
    clean.u_tilt = 0.0;
    oracle.params = clean;
    oracle.observable = {0, length - 1};
    oracle.nodes = 128;
    SpinEstimate spin = spin_correlation(oracle);
    double tol = std::max(1e-3, 3.0 * spin.stderr_ + truncation_tail_bound(g, p));
    double diff = std::abs(path_side - spin.estimate);
    worst = std::max(worst, diff - tol);
    check.detail += "P" + std::to_string(length) + ": |" + std::to_string(path_side) + " - " +
                    std::to_string(spin.estimate) + "|; ";
  }
  check.metric = worst;
  check.threshold = 0.0;
  check.pass = worst <= 0.0;
  return check;
}

VerifyCheck check_colour_switch(const VerifyConfig& cfg) {
  VerifyCheck check;
  check.name = "colour_switch_convergence";
  Graph path = make_path(2);
  ExtendedGraph g(path);
  ModelParams p;
  p.n_colours = 2;
  p.beta = 0.5;
  p.h = 0.5;

  // Oracle side (two-point tables) stays clean; the walk-count expectation
  // is the implementation under test.
  std::vector<int> caps{2, 3, 4};
  std::vector<double> delta;
  for (int cap : caps) {
    ModelParams pc = p;
    pc.cap_orig = cap;
    pc.cap_ghost = cap;
    EnumerationSpec oracle{&g, pc, EnumMode::Aggregate};
    double gxy = two_point(oracle, 0, 1);
    ModelParams pm = pc;
    if (cfg.mutate) pm.u_tilt = cfg.mutation_tilt;
    EnumerationSpec impl{&g, pm, EnumMode::ExplicitPairings};
    double m = expected_mxy(impl, 0, 1) / (p.h * p.h);
    delta.push_back(std::abs(gxy - m));
  }
  bool decreasing = delta[1] < delta[0] && delta[2] < delta[1];
  check.metric = delta.back();
  check.threshold = 1e-3;
  check.pass = decreasing && delta.back() < 1e-3;
  check.detail = "delta(caps 2,3,4) = " + std::to_string(delta[0]) + ", " + std::to_string(delta[1]) +
                 ", " + std::to_string(delta[2]);
  return check;
}

VerifyCheck check_exploration_law(const VerifyConfig& cfg) {
  VerifyCheck check;
  check.name = "exploration_law";
  Graph path = make_path(2);
  ExtendedGraph g(path);
  ModelParams p;
  p.n_colours = 2;
  p.beta = 0.6;
  p.h = 0.9;
  p.cap_orig = 2;
  p.cap_ghost = 4;
  EdgeData cond = EdgeData::empty(g);
  cond.m[0] = 2;
  cond.colours[0] = {2, 2};

  EnumerationSpec spec{&g, p, EnumMode::ExplicitPairings};
  ConditionalTable table = conditional_distribution(spec, cond);

  ModelParams sampler_params = p;
  if (cfg.mutate) sampler_params.u_tilt = cfg.mutation_tilt;
  Rng rng(cfg.seed);
  std::unordered_map<std::string, std::uint64_t> counts;
  for (std::uint64_t t = 0; t < cfg.exploration_traces; ++t) {
    Rng child = rng.split(t);
    auto trace = run_sampling_procedure(g, sampler_params, cond, 0, 2, child);
    counts[canonical_key(trace.final_config)] += 1;
  }
  check.metric = tv_distance(counts, cfg.exploration_traces, table);
  check.threshold = 0.02;
  check.pass = check.metric <= check.threshold;
  check.detail = "TV over " + std::to_string(cfg.exploration_traces) + " traces";
  return check;
}

VerifyCheck check_mcmc_stationarity(const VerifyConfig& cfg) {
  VerifyCheck check;
  check.name = "mcmc_stationarity";
  Graph path = make_path(2);
  ExtendedGraph g(path);
  ModelParams p;
  p.n_colours = 2;
  p.beta = 0.6;
  p.h = 0.9;
  p.cap_orig = 2;
  p.cap_ghost = 2;
  ConditionalTable table = stationary_table(g, p);

  ModelParams chain_params = p;
  if (cfg.mutate) chain_params.u_tilt = cfg.mutation_tilt;
  WormChain chain(g, chain_params, cfg.seed);
  chain.steps(10'000);
  std::unordered_map<std::string, std::uint64_t> counts;
  const int thin = 4;
  std::uint64_t total = cfg.mcmc_steps / thin;
  for (std::uint64_t s = 0; s < total; ++s) {
    chain.steps(thin);
    counts[canonical_key(chain.config())] += 1;
  }
  check.metric = tv_distance(counts, total, table);
  check.threshold = 0.02;
  check.pass = check.metric <= check.threshold;
  check.detail = "TV over " + std::to_string(total) + " retained states";
  return check;
}

}  // namespace

VerifyReport run_verification_suite(const VerifyConfig& cfg) {
  VerifyReport rep;
  rep.mutated = cfg.mutate;
  rep.checks.push_back(check_representation(cfg));
  rep.checks.push_back(check_colour_switch(cfg));
  rep.checks.push_back(check_exploration_law(cfg));
  rep.checks.push_back(check_mcmc_stationarity(cfg));
  rep.all_pass = true;
  for (const auto& c : rep.checks)
    if (!c.pass) rep.all_pass = false;
  return rep;
}

std::string VerifyReport::to_json() const {
  nlohmann::json j;
  auto arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"pass", c.pass},
                   {"metric", c.metric},
                   {"threshold", c.threshold},
                   {"detail", c.detail}});
  j["checks"] = arr;
  j["all_pass"] = all_pass;
  j["mutated"] = mutated;
  return j.dump(2);
}

}  // namespace spinpath
