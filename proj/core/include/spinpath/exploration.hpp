#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinpath/exact.hpp"
#include "spinpath/rng.hpp"

namespace spinpath {

// Vertex-by-vertex revelation of ghost links and pairings conditional on the
// original-edge link counts and colours. Conditional on those, the ghost
// count and the pairing at distinct vertices are independent, so each step
// samples the exact single-vertex law; the final configuration then carries
// the exact conditional law regardless of the strategy.
//
// The walk-tracking strategy follows the surviving walk of smallest ghost
// index from the start vertex and explores its escape vertex; when no walk
// survives it falls back to the lowest-id unexplored vertex.

struct ExplorationStep {
  Vertex vertex = -1;
  int revealed_ghost_links = 0;
  bool k_candidate = false;   // conditioned original-edge degree <= k
  bool k_good = false;        // k-candidate with at least one ghost link
  bool tracked = false;       // a selected walk existed and chose this vertex
  bool walk_died = false;     // the tracked walk ended in a ghost link at this vertex
};

struct ExplorationTrace {
  EdgeData conditioned;
  int k = 0;
  std::vector<ExplorationStep> steps;
  WireConfig final_config;
};

struct PartialExploration {
  const ExtendedGraph* g = nullptr;
  ModelParams params;
  EdgeData conditioned;
  Vertex start = -1;
  WireConfig config;           // revealed part; unexplored vertices have no pairings/ghost links
  std::vector<char> explored;  // per original vertex

  bool fully_explored() const;
};

// Smallest ghost-link index at `start` whose walk escapes the explored set;
// nullopt when no walk survives. `escape` receives the escape vertex.
std::optional<int> selected_walk(const PartialExploration& st, Vertex* escape);

// Next vertex under walk-tracking (escape vertex of the selected walk, else
// lowest-id unexplored). Throws ExplorationComplete when everything is
// explored.
Vertex walk_tracking_next(const PartialExploration& st);

ExplorationTrace run_sampling_procedure(const ExtendedGraph& g, const ModelParams& params,
                                        const EdgeData& conditioned, Vertex start, int k,
                                        Rng& rng);

struct DeathReport {
  std::uint64_t candidate_steps = 0;  // tracked steps at k-candidate vertices
  std::uint64_t deaths = 0;
  double frequency = 0.0;
  double stderr_ = 0.0;
  double wilson_low = 0.0, wilson_high = 0.0;
  double c6 = 0.0;
  bool pass = false;  // frequency >= c6 - 3*stderr
  std::string to_json() const;
};

// Conditional death frequency at tracked k-candidate steps against the c6
// lower bound.
DeathReport death_statistics(const std::vector<ExplorationTrace>& traces, int k, double c6);

struct DominationReport {
  int ell = 0;
  double c6 = 0.0;
  std::vector<int> r_grid;
  std::vector<double> empirical_ccdf;
  std::vector<double> bound_ccdf;  // negative-binomial tail
  std::vector<double> stderr_;
  int violations = 0;  // empirical > bound + 3*se
  std::string to_json() const;
};

// Empirical CCDF of the sum of the first `ell` between-death candidate-step
// counts against the geometric-sum tail.
DominationReport domination_check(const std::vector<ExplorationTrace>& traces, double c6, int ell,
                                  const std::vector<int>& r_grid);

// Per-trace X_1..X_ell: tracked k-candidate steps between consecutive deaths
// (the window after the last death runs to the end of the trace).
std::vector<int> death_gaps(const ExplorationTrace& trace, int ell);

std::string trace_to_jsonl(const ExtendedGraph& g, const ExplorationTrace& trace);

}  // namespace spinpath
