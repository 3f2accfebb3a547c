// spinpath: exact enumeration, spin-integral oracle, worm MCMC and
// exploration experiments for the coloured random-path representation of the
// Spin O(N) model.
//
// Exit codes: 0 success / all checks pass, 1 check failure, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinpath/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinpath;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path resolve_out(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("SPINPATH_OUT_DIR")) p = fs::path(dir) / p;
  }
  return p;
}

// All file outputs are written atomically (temp file + rename).
void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content << "\n";
    return;
  }
  fs::path target = resolve_out(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::UsageError, "cannot open output file " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

Graph parse_graph(const std::string& desc) {
  if (desc.size() > 5 && desc.substr(desc.size() - 5) == ".json") {
    std::ifstream in(desc);
    require(in.good(), Errc::UsageError, "cannot read graph file " + desc);
    std::stringstream ss;
    ss << in.rdbuf();
    return graph_from_json(ss.str());
  }
  std::vector<std::string> parts;
  std::stringstream ss(desc);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  require(!parts.empty(), Errc::UsageError, "empty graph description");
  auto arg = [&parts](std::size_t i) {
    require(i < parts.size(), Errc::UsageError, "graph description needs more parameters");
    return std::stoi(parts[i]);
  };
  if (parts[0] == "path") return make_path(arg(1));
  if (parts[0] == "cycle") return make_cycle(arg(1));
  if (parts[0] == "grid") return make_grid(arg(1), arg(2));
  if (parts[0] == "tree") return make_regular_tree(arg(1), arg(2));
  fail(Errc::UsageError, "unknown graph generator '" + parts[0] + "'");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  require(in.good(), Errc::UsageError, "cannot read config file " + path);
  json j;
  in >> j;
  return j;
}

// Flags win over config-file values; config values win over defaults.
template <typename T>
void cfg_get(const json& cfg, const CLI::App& app, const std::string& flag, const char* key, T& var) {
  if (app.count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

struct ModelFlags {
  int n_colours = 2;
  double beta = 0.5;
  double h = 1.0;
  int cap = 4;
  int cap_ghost = 8;
  std::string config_path;

  void attach(CLI::App* cmd) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--config", config_path, "JSON config file; flags override its values");
    cmd->add_option("--N", n_colours, "number of colours");
    cmd->add_option("--beta", beta, "coupling");
    cmd->add_option("--h", h, "external field");
    cmd->add_option("--cap", cap, "original-edge link cap (-1 = uncapped)");
    cmd->add_option("--cap-ghost", cap_ghost, "ghost-edge link cap (-1 = uncapped)");
  }
  ModelParams params(const json& cfg, const CLI::App& app) {
    cfg_get(cfg, app, "--N", "N", n_colours);
    cfg_get(cfg, app, "--beta", "beta", beta);
    cfg_get(cfg, app, "--h", "h", h);
    cfg_get(cfg, app, "--cap", "cap", cap);
    cfg_get(cfg, app, "--cap-ghost", "cap_ghost", cap_ghost);
    ModelParams p;
    p.n_colours = n_colours;
    p.beta = beta;
    p.h = h;
    p.cap_orig = cap < 0 ? kUncapped : cap;
    p.cap_ghost = cap_ghost < 0 ? kUncapped : cap_ghost;
    return p;
  }
};

EdgeData parse_edge_data(const ExtendedGraph& g, const std::string& text) {
  json j = text.size() > 5 && text.substr(text.size() - 5) == ".json"
               ? load_config(text)
               : json::parse(text);
  EdgeData data = EdgeData::empty(g);
  for (const auto& row : j) {
    Vertex u = row.at(0).get<int>(), v = row.at(1).get<int>();
    EdgeId e = g.base().edge_id(u, v);
    require(e >= 0, Errc::UsageError, "conditioned edge not in graph");
    data.colours[static_cast<std::size_t>(e)] = row.at(2).get<std::vector<int>>();
    data.m[static_cast<std::size_t>(e)] =
        static_cast<int>(data.colours[static_cast<std::size_t>(e)].size());
  }
  return data;
}

Observable parse_observable(const std::string& desc) {
  std::vector<std::string> parts;
  std::stringstream ss(desc);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  require(!parts.empty(), Errc::UsageError, "empty observable");
  Observable o;
  o.name = desc;
  if (parts[0] == "M") {
    o.kind = Observable::Kind::WalkCount;
    o.x = std::stoi(parts.at(1));
    o.y = std::stoi(parts.at(2));
  } else if (parts[0] == "mg") {
    o.kind = Observable::Kind::GhostLinks;
    o.z = std::stoi(parts.at(1));
  } else if (parts[0] == "tail") {
    o.kind = Observable::Kind::AllLocalTimesGeq;
    o.k = std::stoi(parts.at(1));
    for (int v : parse_int_list(parts.at(2))) o.a.push_back(v);
  } else if (parts[0] == "ghost-tail") {
    o.kind = Observable::Kind::GhostLinksTimesInd;
    o.k = std::stoi(parts.at(1));
    o.z = std::stoi(parts.at(2));
    for (int v : parse_int_list(parts.at(3))) o.a.push_back(v);
  } else if (parts[0] == "path-event") {
    o.kind = Observable::Kind::PathEvent;
    o.x = std::stoi(parts.at(1));
    o.y = std::stoi(parts.at(2));
    o.k = std::stoi(parts.at(3));
    o.eps = parts.size() > 4 ? std::stod(parts[4]) : 0.1;
  } else {
    fail(Errc::UsageError, "unknown observable '" + parts[0] + "'");
  }
  return o;
}

int run(int argc, char** argv) {
  CLI::App app{"Spin O(N) random-path engine"};
  app.require_subcommand(1);
  // --h is the external-field flag, so the help flag keeps only its long form
  app.set_help_flag("--help", "print help");

  // --- constants ---------------------------------------------------------
  auto* c_cmd = app.add_subcommand("constants", "explicit decay-constant chain");
  ModelFlags c_model;
  c_model.attach(c_cmd);
  int c_k = 6, c_dstar = 2;
  double c_eps = 0.1;
  std::string c_out;
  c_cmd->add_option("--k", c_k, "local-time threshold");
  c_cmd->add_option("--dstar", c_dstar, "maximum degree");
  c_cmd->add_option("--eps", c_eps, "epsilon in (0,1)");
  c_cmd->add_option("--out", c_out, "output path (default stdout)");

  // --- enumerate ---------------------------------------------------------
  auto* e_cmd = app.add_subcommand("enumerate", "exact partition function at finite caps");
  ModelFlags e_model;
  e_model.attach(e_cmd);
  std::string e_graph = "path:2", e_class = "loops", e_mode = "aggregate", e_out;
  int e_x = 0, e_y = 1, e_threads = 1;
  std::uint64_t e_budget = 100'000'000;
  e_cmd->add_option("--graph", e_graph, "path:N | cycle:N | grid:R:C | tree:D:DEPTH | file.json");
  e_cmd->add_option("--class", e_class, "loops | pair");
  e_cmd->add_option("--x", e_x, "open-pair vertex");
  e_cmd->add_option("--y", e_y, "open-pair vertex");
  e_cmd->add_option("--mode", e_mode, "aggregate | explicit");
  e_cmd->add_option("--budget", e_budget, "max enumerated terms");
  e_cmd->add_option("--threads", e_threads, "parallel top-level branches");
  e_cmd->add_option("--out", e_out, "output path");

  // --- oracle ------------------------------------------------------------
  auto* o_cmd = app.add_subcommand("oracle", "spin-side integral oracle");
  ModelFlags o_model;
  o_model.attach(o_cmd);
  std::string o_graph = "path:2", o_a = "0,1", o_method = "quadrature", o_interaction = "boltzmann",
              o_out;
  int o_nodes = 128, o_component = 1, o_ktrunc = 1;
  std::uint64_t o_samples = 1'000'000, o_seed = 1;
  o_cmd->add_option("--graph", o_graph, "graph description");
  o_cmd->add_option("--A", o_a, "observable vertex set, comma separated");
  o_cmd->add_option("--component", o_component, "spin component in the product");
  o_cmd->add_option("--method", o_method, "quadrature | mc");
  o_cmd->add_option("--interaction", o_interaction, "boltzmann | truncated");
  o_cmd->add_option("--k-trunc", o_ktrunc, "truncation order");
  o_cmd->add_option("--nodes", o_nodes, "quadrature resolution");
  o_cmd->add_option("--samples", o_samples, "MC samples");
  o_cmd->add_option("--seed", o_seed, "MC seed");
  o_cmd->add_option("--out", o_out, "output path");

  // --- mcmc --------------------------------------------------------------
  auto* m_cmd = app.add_subcommand("mcmc", "worm-chain estimates");
  ModelFlags m_model;
  m_model.attach(m_cmd);
  std::string m_graph = "path:3", m_out, m_trace, m_snapshots;
  std::vector<std::string> m_obs;
  std::uint64_t m_steps = 1'000'000, m_burnin = 10'000, m_seed = 1;
  int m_thin = 10, m_snapshot_every = 0;
  m_cmd->add_option("--graph", m_graph, "graph description");
  m_cmd->add_option("--obs", m_obs,
                    "observables: M:x:y | mg:z | tail:k:a,b | ghost-tail:k:z:a,b | path-event:x:y:k[:eps]");
  m_cmd->add_option("--steps", m_steps, "post burn-in steps");
  m_cmd->add_option("--burnin", m_burnin, "burn-in steps");
  m_cmd->add_option("--thin", m_thin, "sampling stride");
  m_cmd->add_option("--seed", m_seed, "chain seed");
  m_cmd->add_option("--trace-csv", m_trace, "CSV trace of retained samples");
  m_cmd->add_option("--snapshots", m_snapshots, "JSON-lines config snapshots");
  m_cmd->add_option("--snapshot-every", m_snapshot_every, "snapshot cadence in retained samples");
  m_cmd->add_option("--out", m_out, "output path");

  // --- explore -----------------------------------------------------------
  auto* x_cmd = app.add_subcommand("explore", "sampling-procedure traces and death statistics");
  ModelFlags x_model;
  x_model.attach(x_cmd);
  std::string x_graph = "path:3", x_cond = "[]", x_out, x_dump;
  int x_start = 0, x_k = 2, x_ell = 2, x_rmax = 20;
  std::uint64_t x_traces = 10'000, x_seed = 1;
  double x_eps = 0.1;
  x_cmd->add_option("--graph", x_graph, "graph description");
  x_cmd->add_option("--cond", x_cond, "conditioned edge data [[u,v,[colours]],...] or file.json");
  x_cmd->add_option("--start", x_start, "walk-tracking start vertex");
  x_cmd->add_option("--k", x_k, "candidate threshold");
  x_cmd->add_option("--traces", x_traces, "number of traces");
  x_cmd->add_option("--ell", x_ell, "domination check: number of deaths");
  x_cmd->add_option("--rmax", x_rmax, "domination check: r grid 1..rmax");
  x_cmd->add_option("--eps", x_eps, "epsilon for the constants chain");
  x_cmd->add_option("--seed", x_seed, "seed");
  x_cmd->add_option("--dump", x_dump, "JSON-lines trace dump of the first trace");
  x_cmd->add_option("--out", x_out, "output path");

  // --- decay -------------------------------------------------------------
  auto* d_cmd = app.add_subcommand("decay", "transverse correlation decay on path graphs");
  ModelFlags d_model;
  d_model.attach(d_cmd);
  std::string d_engine = "exact", d_sweep, d_out, d_csv;
  int d_lmin = 2, d_lmax = 8, d_nodes = 128;
  std::uint64_t d_seed = 1, d_steps = 400'000;
  d_cmd->add_option("--lmin", d_lmin, "smallest path length");
  d_cmd->add_option("--lmax", d_lmax, "largest path length");
  d_cmd->add_option("--engine", d_engine, "exact | mcmc | spin");
  d_cmd->add_option("--h-sweep", d_sweep, "comma-separated h values for the rate sweep");
  d_cmd->add_option("--mcmc-steps", d_steps, "steps per point (mcmc engine)");
  d_cmd->add_option("--nodes", d_nodes, "quadrature resolution (spin engine)");
  d_cmd->add_option("--seed", d_seed, "seed");
  d_cmd->add_option("--csv", d_csv, "write decay rows as CSV");
  d_cmd->add_option("--out", d_out, "output path");

  // --- tails -------------------------------------------------------------
  auto* t_cmd = app.add_subcommand("tails", "local-time tail bounds via MCMC");
  ModelFlags t_model;
  t_model.attach(t_cmd);
  std::string t_graph = "path:3", t_sets = "0;0,1", t_ks = "8,10", t_out;
  std::uint64_t t_steps = 1'000'000, t_seed = 1;
  double t_eps = 0.1;
  t_cmd->add_option("--graph", t_graph, "graph description");
  t_cmd->add_option("--sets", t_sets, "vertex sets, ';' separated, ',' within");
  t_cmd->add_option("--ks", t_ks, "local-time thresholds");
  t_cmd->add_option("--steps", t_steps, "MCMC steps");
  t_cmd->add_option("--eps", t_eps, "epsilon for the constants chain");
  t_cmd->add_option("--seed", t_seed, "seed");
  t_cmd->add_option("--out", t_out, "output path");

  // --- verify ------------------------------------------------------------
  auto* v_cmd = app.add_subcommand("verify", "cross-oracle verification suite");
  v_cmd->set_help_flag("--help", "print help");
  std::string v_preset = "desk", v_out;
  bool v_mutate = false;
  std::uint64_t v_seed = 1;
  v_cmd->add_option("--preset", v_preset, "desk (the only preset)");
  v_cmd->add_flag("--mutate", v_mutate, "tilt the implementation-side on-site weight by 1%");
  v_cmd->add_option("--seed", v_seed, "seed");
  v_cmd->add_option("--out", v_out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (c_cmd->parsed()) {
    json cfg = load_config(c_model.config_path);
    ModelParams p = c_model.params(cfg, *c_cmd);
    cfg_get(cfg, *c_cmd, "--k", "k", c_k);
    cfg_get(cfg, *c_cmd, "--dstar", "dstar", c_dstar);
    cfg_get(cfg, *c_cmd, "--eps", "eps", c_eps);
    write_output(c_out, constants_chain(p, c_dstar, c_k, c_eps).to_json());
    return 0;
  }

  if (e_cmd->parsed()) {
    json cfg = load_config(e_model.config_path);
    ModelParams p = e_model.params(cfg, *e_cmd);
    cfg_get(cfg, *e_cmd, "--graph", "graph", e_graph);
    Graph base = parse_graph(e_graph);
    ExtendedGraph g(base);
    EnumerationSpec spec{&g, p, e_mode == "explicit" ? EnumMode::ExplicitPairings : EnumMode::Aggregate,
                         e_budget, e_threads};
    ClassSpec cls = e_class == "pair" ? ClassSpec::open_pair(e_x, e_y) : ClassSpec::loops_only();
    PartitionResult res = enumerate_partition(spec, cls);
    json out = json::parse(res.to_json(spec));
    if (e_class == "pair") out["two_point"] = two_point(spec, e_x, e_y);
    write_output(e_out, out.dump(2));
    return 0;
  }

  if (o_cmd->parsed()) {
    json cfg = load_config(o_model.config_path);
    ModelParams p = o_model.params(cfg, *o_cmd);
    Graph base = parse_graph(o_graph);
    SpinIntegralSpec spec;
    spec.graph = &base;
    spec.params = p;
    for (int v : parse_int_list(o_a)) spec.observable.push_back(v);
    spec.component = o_component;
    spec.interaction = o_interaction == "truncated" ? Interaction::Truncated : Interaction::Boltzmann;
    spec.truncation_k = o_ktrunc;
    spec.method = o_method == "mc" ? SpinMethod::MonteCarlo : SpinMethod::ProductQuadrature;
    spec.nodes = o_nodes;
    spec.samples = o_samples;
    spec.seed = o_seed;
    write_output(o_out, spin_correlation(spec).to_json());
    return 0;
  }

  if (m_cmd->parsed()) {
    json cfg = load_config(m_model.config_path);
    ModelParams p = m_model.params(cfg, *m_cmd);
    cfg_get(cfg, *m_cmd, "--graph", "graph", m_graph);
    cfg_get(cfg, *m_cmd, "--steps", "steps", m_steps);
    cfg_get(cfg, *m_cmd, "--seed", "seed", m_seed);
    Graph base = parse_graph(m_graph);
    ExtendedGraph g(base);
    std::vector<Observable> obs;
    for (const auto& s : m_obs) obs.push_back(parse_observable(s));
    require(!obs.empty(), Errc::UsageError, "mcmc needs at least one --obs");
    McmcSchedule sched;
    sched.burn_in = m_burnin;
    sched.steps = m_steps;
    sched.thin = m_thin;
    std::string trace_csv = "step";
    for (const auto& o : obs) trace_csv += "," + o.name;
    trace_csv += "\n";
    std::string snapshots;
    std::uint64_t retained = 0;
    SampleHook hook = nullptr;
    if (!m_trace.empty() || (!m_snapshots.empty() && m_snapshot_every > 0)) {
      hook = [&](std::uint64_t step, const std::vector<double>& values, const WireConfig& w) {
        ++retained;
        if (!m_trace.empty()) {
          trace_csv += std::to_string(step);
          char buf[64];
          for (double v : values) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            trace_csv += buf;
          }
          trace_csv += "\n";
        }
        if (!m_snapshots.empty() && m_snapshot_every > 0 &&
            retained % static_cast<std::uint64_t>(m_snapshot_every) == 0)
          snapshots += wire_to_json(g, w) + "\n";
      };
    }
    auto est = mcmc_estimate(g, p, obs, sched, m_seed, hook);
    json out;
    auto arr = json::array();
    for (const auto& e : est)
      arr.push_back({{"name", e.name},
                     {"mean", e.mean},
                     {"stderr", e.stderr_},
                     {"iat", e.iat},
                     {"samples", e.samples}});
    out["estimates"] = arr;
    out["seed"] = m_seed;
    if (!m_trace.empty()) write_output(m_trace, trace_csv);
    if (!m_snapshots.empty()) write_output(m_snapshots, snapshots);
    write_output(m_out, out.dump(2));
    return 0;
  }

  if (x_cmd->parsed()) {
    json cfg = load_config(x_model.config_path);
    ModelParams p = x_model.params(cfg, *x_cmd);
    Graph base = parse_graph(x_graph);
    ExtendedGraph g(base);
    EdgeData cond = parse_edge_data(g, x_cond);
    Rng root(x_seed);
    std::vector<ExplorationTrace> traces;
    traces.reserve(static_cast<std::size_t>(x_traces));
    for (std::uint64_t t = 0; t < x_traces; ++t) {
      Rng child = root.split(t);
      traces.push_back(run_sampling_procedure(g, p, cond, x_start, x_k, child));
    }
    ConstantsReport cons = constants_chain(p, base.max_degree(), x_k, x_eps);
    DeathReport death = death_statistics(traces, x_k, cons.c6);
    std::vector<int> r_grid;
    for (int r = 1; r <= x_rmax; ++r) r_grid.push_back(r);
    DominationReport dom = domination_check(traces, cons.c6, x_ell, r_grid);
    json out;
    out["constants"] = json::parse(cons.to_json());
    out["death"] = json::parse(death.to_json());
    out["domination"] = json::parse(dom.to_json());
    if (!x_dump.empty()) write_output(x_dump, trace_to_jsonl(g, traces.front()));
    write_output(x_out, out.dump(2));
    return death.pass && dom.violations == 0 ? 0 : 1;
  }

  if (d_cmd->parsed()) {
    json cfg = load_config(d_model.config_path);
    DecayConfig dc;
    dc.params = d_model.params(cfg, *d_cmd);
    cfg_get(cfg, *d_cmd, "--lmin", "lmin", d_lmin);
    cfg_get(cfg, *d_cmd, "--lmax", "lmax", d_lmax);
    cfg_get(cfg, *d_cmd, "--engine", "engine", d_engine);
    cfg_get(cfg, *d_cmd, "--h-sweep", "h_sweep", d_sweep);
    dc.l_min = d_lmin;
    dc.l_max = d_lmax;
    dc.engine = d_engine == "mcmc" ? Engine::Mcmc
                : d_engine == "spin" ? Engine::SpinOracle
                                     : Engine::Exact;
    dc.h_sweep = parse_double_list(d_sweep);
    dc.schedule.steps = d_steps;
    dc.seed = d_seed;
    dc.quad_nodes = d_nodes;
    DecayReport rep = run_decay(dc);
    if (!d_csv.empty()) write_output(d_csv, rep.rows_csv());
    write_output(d_out, rep.to_json());
    if (!rep.note.empty()) return 0;  // guard case reported, not a failure
    return rep.fit && rep.fit->rate > 0.0 ? 0 : 1;
  }

  if (t_cmd->parsed()) {
    json cfg = load_config(t_model.config_path);
    TailsConfig tc;
    tc.params = t_model.params(cfg, *t_cmd);
    tc.graph = parse_graph(t_graph);
    std::stringstream ss(t_sets);
    std::string group;
    while (std::getline(ss, group, ';')) {
      std::vector<Vertex> a;
      for (int v : parse_int_list(group)) a.push_back(v);
      if (!a.empty()) tc.sets.push_back(a);
    }
    tc.ks = parse_int_list(t_ks);
    tc.eps = t_eps;
    tc.schedule.steps = t_steps;
    tc.seed = t_seed;
    TailsReport rep = run_local_time_tails(tc);
    write_output(t_out, rep.to_json());
    return rep.pass ? 0 : 1;
  }

  if (v_cmd->parsed()) {
    require(v_preset == "desk", Errc::UsageError, "unknown preset '" + v_preset + "'");
    VerifyConfig vc;
    vc.mutate = v_mutate;
    vc.seed = v_seed;
    VerifyReport rep = run_verification_suite(vc);
    write_output(v_out, rep.to_json());
    return rep.all_pass ? 0 : 1;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError&) {
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
