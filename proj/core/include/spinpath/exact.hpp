#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "spinpath/weights.hpp"

namespace spinpath {

enum class EnumMode { Aggregate, ExplicitPairings };

// Target state class for an enumeration: which vertices carry the single
// unpaired colour-1 endpoint.
struct ClassSpec {
  StateClass::Kind kind = StateClass::Kind::LoopsOnly;
  std::vector<Vertex> open;  // empty / {x,y} / general A

  static ClassSpec loops_only() { return {}; }
  static ClassSpec open_pair(Vertex x, Vertex y) {
    return {StateClass::Kind::OpenPair, {x, y}};
  }
  static ClassSpec open_set(std::vector<Vertex> a);

  // Per-vertex prescribed unpaired colour-1 endpoint count.
  std::vector<int> unpaired_one(const ExtendedGraph& g) const;
};

struct EnumerationSpec {
  const ExtendedGraph* graph = nullptr;
  ModelParams params;
  EnumMode mode = EnumMode::Aggregate;
  std::uint64_t budget = 100'000'000;  // max enumerated terms
  int threads = 1;
};

struct PartitionResult {
  double log_z = kNegInf;
  std::uint64_t term_count = 0;
  double tail_bound = 0.0;
  std::string to_json(const EnumerationSpec& spec) const;
};

// Z restricted to the class, at the spec's finite caps. Aggregate mode sums
// per-colour link counts with pairing multiplicities (the weight depends on
// pairings only through local times); ExplicitPairings re-counts the
// per-vertex pairings by literal enumeration and must agree exactly.
PartitionResult enumerate_partition(const EnumerationSpec& spec, const ClassSpec& cls);

// Two-point function: Z({x,y}) / Z(loops), identical caps on both sides.
double two_point(const EnumerationSpec& spec, Vertex x, Vertex y);

// E[M_xy] under the loops-only probability measure at the spec's caps.
// Requires ExplicitPairings mode: M_xy depends on the pairing topology.
// Internally the per-vertex uniform-pairing structure is integrated out
// exactly by walking the link revelation process; the literal route is
// exposed for cross-checks as expected_mxy_literal.
double expected_mxy(const EnumerationSpec& spec, Vertex x, Vertex y);
double expected_mxy_literal(const EnumerationSpec& spec, Vertex x, Vertex y);

struct ColourSwitchReport {
  std::vector<int> caps;
  std::vector<double> two_point_values;
  std::vector<double> m_over_h2;
  std::vector<double> delta;
  bool strictly_decreasing = false;
  double final_delta = 0.0;
  std::string to_json() const;
};

// Convergence (in the caps) of the identity G(x,y) = E[M_xy]/h^2. Each cap in
// the sequence sets both the original and the ghost cap; the identity is
// exact only in the uncapped limit because the walk-to-ghost bijection
// shifts ghost-link counts on {x,g} and {y,g}.
ColourSwitchReport verify_colour_switch(EnumerationSpec spec, Vertex x, Vertex y,
                                        const std::vector<int>& cap_sequence);

// Conditioned original-edge data: link counts and labelled colour lists.
struct EdgeData {
  std::vector<int> m;                      // per original edge
  std::vector<std::vector<int>> colours;   // per original edge, length m[e]

  static EdgeData empty(const ExtendedGraph& g);
  std::vector<std::vector<int>> colour_counts(const ExtendedGraph& g, int n_colours) const;
};

// Throws InadmissiblePair unless every colour i < N has even degree at every
// vertex (colour N may be odd: the ghost completion restores parity) and the
// counts fit the caps.
void check_admissible(const ExtendedGraph& g, const EdgeData& data, const ModelParams& p);

// Exact law of the completion (ghost counts + all pairings) given the
// original-edge data. Ground truth for the exploration and MCMC tests;
// weights come from config_log_weight, independent of the enumerators.
struct ConditionalTable {
  std::vector<WireConfig> configs;
  std::vector<double> prob;
  std::unordered_map<std::string, int> index;  // canonical_key -> position

  double prob_of_key(const std::string& key) const {
    auto it = index.find(key);
    return it == index.end() ? 0.0 : prob[static_cast<std::size_t>(it->second)];
  }
};

ConditionalTable conditional_distribution(const EnumerationSpec& spec, const EdgeData& data);

// Aggregate-mode leaf visitor, exposed for observables that need the
// enumerated counts (per original edge and colour, plus ghost counts).
struct AggregateView {
  const std::vector<std::vector<int>>& edge_counts;  // [orig edge][colour-1]
  const std::vector<int>& ghost_counts;              // [vertex]
  double log_weight;
};
void for_each_aggregate(const ExtendedGraph& g, const ModelParams& p, const ClassSpec& cls,
                        std::uint64_t budget, const std::function<void(const AggregateView&)>& visit);

// Explicit-mode visitor over fully assembled configurations (small instances).
void for_each_explicit_config(const ExtendedGraph& g, const ModelParams& p, const ClassSpec& cls,
                              std::uint64_t budget,
                              const std::function<void(const WireConfig&, double)>& visit);

}  // namespace spinpath
