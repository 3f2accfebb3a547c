#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spinpath/exact.hpp"
#include "spinpath/rng.hpp"

namespace spinpath {

// Metropolis-Hastings move set for the loops-only measure. Every insert has
// an exact reverse acting on the last link slots of the touched edges; the
// label-shuffle move makes the labelled state space fully connected.
//
// Parity note: inserts of paired 2-link units alone preserve every per-edge
// link-count parity, so walk units (one ghost link at each endpoint of an
// original edge plus the connecting link) and loop units around a cycle
// basis are part of the set; together they span all parity classes reachable
// in the loops-only space. The reduction argument is spelled out in
// docs/sampler.md.
enum class MoveType {
  InsertOrigPair,
  DeleteOrigPair,
  InsertGhostPair,
  DeleteGhostPair,
  InsertWalk,
  DeleteWalk,
  InsertCycle,
  DeleteCycle,
  Repair,
  Transplant,
  Shuffle,
};
constexpr int kMoveTypeCount = 11;

struct MoveStats {
  std::array<std::uint64_t, kMoveTypeCount> proposed{};
  std::array<std::uint64_t, kMoveTypeCount> accepted{};
  double acceptance_rate() const;
};

class WormChain {
 public:
  WormChain(const ExtendedGraph& g, ModelParams params, std::uint64_t seed);

  void step();
  void steps(std::uint64_t count);

  const WireConfig& config() const { return config_; }
  const ExtendedGraph& graph() const { return *g_; }
  const ModelParams& params() const { return params_; }
  double log_weight() const { return log_weight_; }
  const MoveStats& stats() const { return stats_; }
  int local_time(Vertex x) const { return local_time_[static_cast<std::size_t>(x)]; }

  // Recomputes the cached local times and log weight from scratch and
  // checks them against the incrementally maintained values.
  void check_cache() const;

  // Deterministic state edits used by the proposals; exposed so tests can
  // verify that each move composed with its reverse is the identity.
  void apply_insert_orig_pair(EdgeId e, int colour);
  void apply_delete_orig_pair(EdgeId e);
  void apply_insert_ghost_pair(Vertex x);
  void apply_delete_ghost_pair(Vertex x);
  void apply_insert_walk(EdgeId e);
  void apply_delete_walk(EdgeId e);
  void apply_insert_cycle(int cycle_index, int colour);
  void apply_delete_cycle(int cycle_index);
  void apply_transplant(EdgeId from, EdgeId to);

  bool deletable_pair_at_end(EdgeId e) const;
  bool deletable_walk_at_end(EdgeId e) const;
  bool deletable_cycle_at_end(int cycle_index, int* colour_out = nullptr) const;

  const std::vector<std::vector<EdgeId>>& cycle_basis() const { return cycles_; }

 private:
  void propose(MoveType t);
  bool metropolis(double delta_log_mu, double log_proposal_ratio);
  double site_delta(Vertex x, int change) const;

  const ExtendedGraph* g_;
  ModelParams params_;
  WireConfig config_;
  std::vector<int> local_time_;
  double log_weight_ = 0.0;
  Rng rng_;
  MoveStats stats_;
  std::vector<double> move_weights_;
  std::vector<std::vector<EdgeId>> cycles_;        // fundamental cycle basis (edge lists)
  std::vector<std::vector<Vertex>> cycle_verts_;   // vertex sequence per cycle
};

// Observables measured along a chain.
struct Observable {
  enum class Kind {
    WalkCount,          // M_{x,y}
    GhostLinks,         // m_{z,g}
    AllLocalTimesGeq,   // 1{ forall x in A: n_x >= k }
    GhostLinksTimesInd, // m_{z,g} * 1{ forall x in A: n_x >= k }
    PathEvent,          // 1{ some self-avoiding x->y path has >= eps*|path| vertices with n > k }
  };
  Kind kind = Kind::GhostLinks;
  Vertex x = -1, y = -1, z = -1;
  std::vector<Vertex> a;
  int k = 0;
  double eps = 0.1;
  std::string name;

  double evaluate(const ExtendedGraph& g, const WireConfig& w, const LocalTimes& lt) const;
};

struct McmcSchedule {
  std::uint64_t burn_in = 10'000;
  std::uint64_t steps = 1'000'000;
  int thin = 10;
  double max_iat_fraction = 0.02;  // NotEquilibrated when IAT exceeds this fraction of samples
};

struct McmcEstimate {
  std::string name;
  double mean = 0.0;
  double stderr_ = 0.0;
  double iat = 1.0;  // integrated autocorrelation time, in thinned samples
  std::uint64_t samples = 0;
};

// Batched-means estimates; the optional hook sees every retained sample (for
// CSV traces and config snapshots).
using SampleHook = std::function<void(std::uint64_t step, const std::vector<double>& values,
                                      const WireConfig& config)>;

std::vector<McmcEstimate> mcmc_estimate(const ExtendedGraph& g, const ModelParams& params,
                                        const std::vector<Observable>& observables,
                                        const McmcSchedule& schedule, std::uint64_t seed,
                                        const SampleHook& hook = nullptr);

}  // namespace spinpath
