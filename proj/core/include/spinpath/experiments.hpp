#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinpath/exact.hpp"
#include "spinpath/exploration.hpp"
#include "spinpath/mcmc.hpp"
#include "spinpath/spin_oracle.hpp"

namespace spinpath {

enum class Engine { Exact, Mcmc, SpinOracle };

// Transverse two-point decay on a family of path graphs P_L, endpoints
// x = 0, y = L-1, plus an optional field sweep refitting the rate per h.
struct DecayConfig {
  int l_min = 2;
  int l_max = 8;
  ModelParams params;
  Engine engine = Engine::Exact;
  std::vector<double> h_sweep;
  McmcSchedule schedule;  // Mcmc engine only
  std::uint64_t seed = 1;
  int quad_nodes = 128;  // SpinOracle engine only
  std::uint64_t budget = 100'000'000;
};

struct DecayRow {
  int distance = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  bool used_in_fit = false;
};

struct DecayFit {
  double rate = 0.0;       // c0_hat
  double log_prefactor = 0.0;
  double rate_variance = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  std::optional<DecayFit> fit;
  std::string note;  // e.g. the h = 0 guard
  std::vector<std::pair<double, double>> rate_vs_h;
  std::optional<double> h_scaling_slope;  // log c0_hat vs log h
  bool monotone_decreasing = false;
  std::string to_json() const;
  std::string rows_csv() const;
};

DecayReport run_decay(const DecayConfig& cfg);

// Weighted least squares of log(estimate) on distance; rows below the
// 5-sigma signal floor are excluded. Throws InsufficientSignal if fewer
// than two rows survive.
DecayFit fit_exponential_decay(std::vector<DecayRow>& rows);

// Local-time tail bounds against the c1 chain on one instance.
struct TailsConfig {
  Graph graph;
  ModelParams params;
  std::vector<std::vector<Vertex>> sets;  // the A's (z = first element)
  std::vector<int> ks;
  double eps = 0.1;
  McmcSchedule schedule;
  std::uint64_t seed = 1;
};

struct TailsRow {
  std::vector<Vertex> set_a;
  int k = 0;
  double c1 = 0.0;
  double bound = 0.0;  // c1^{|A|}
  bool vacuous = false;
  double empirical = 0.0, stderr_ = 0.0;
  double ghost_empirical = 0.0, ghost_stderr = 0.0;
  double ghost_bound = 0.0;  // h * c1^{|A|}
  bool violation = false;
};

struct TailsReport {
  std::vector<TailsRow> rows;
  long long k_nonvacuous = -1;  // smallest k with c1 < 1
  bool pass = false;            // no violation among non-vacuous rows
  std::string to_json() const;
};

TailsReport run_local_time_tails(const TailsConfig& cfg);

// Cross-oracle verification: path-vs-spin equivalence, colour-switch
// convergence, exploration law, MCMC stationarity. With `mutate` set, the
// implementation-side weights carry a 1% on-site tilt while every oracle
// stays clean; the affected checks are expected to fail.
struct VerifyCheck {
  std::string name;
  bool pass = false;
  double metric = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass = false;
  bool mutated = false;
  std::string to_json() const;
};

struct VerifyConfig {
  bool mutate = false;
  double mutation_tilt = 0.00995033085316808285;  // log(1.01): U(r) off by 1% per unit local time
  std::uint64_t seed = 1;
  std::uint64_t exploration_traces = 30'000;
  std::uint64_t mcmc_steps = 400'000;
};

VerifyReport run_verification_suite(const VerifyConfig& cfg);

// Total variation between an empirical key->count map and an exact table.
double tv_distance(const std::unordered_map<std::string, std::uint64_t>& counts,
                   std::uint64_t total, const ConditionalTable& table);

// Exact loops-only law at finite caps keyed like the conditional tables.
ConditionalTable stationary_table(const ExtendedGraph& g, const ModelParams& params,
                                  std::uint64_t budget = 100'000'000);

}  // namespace spinpath
