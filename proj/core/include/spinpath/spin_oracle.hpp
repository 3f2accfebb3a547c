#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinpath/graph.hpp"
#include "spinpath/weights.hpp"

namespace spinpath {

enum class Interaction { Boltzmann, Truncated };
enum class SpinMethod { ProductQuadrature, MonteCarlo };

// Direct spin-side evaluation of < prod_{x in A} phi^component_x > on the
// original graph (no ghost): the ground truth the path representation is
// checked against. Quadrature supports N in {2,3}; Monte Carlo any N >= 2.
struct SpinIntegralSpec {
  const Graph* graph = nullptr;
  ModelParams params;
  std::vector<Vertex> observable;  // A
  int component = 1;               // spin component in the product (1..N)
  Interaction interaction = Interaction::Boltzmann;
  int truncation_k = 1;            // Truncated only; k >= 1
  SpinMethod method = SpinMethod::ProductQuadrature;
  int nodes = 128;                 // per-dimension quadrature resolution
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t budget = 200'000'000;  // max quadrature point evaluations
};

struct SpinEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;  // refinement delta (quadrature) or jackknife se (MC)
  std::string method;
  std::uint64_t nodes_or_samples = 0;
  std::uint64_t seed = 0;
  bool denominator_warning = false;  // signed-weight normalization near zero
  std::string to_json() const;
};

SpinEstimate spin_correlation(const SpinIntegralSpec& spec);

// Degree-k Taylor truncation of e^{beta * dot}; signed for large beta.
double truncated_edge_factor(double dot, double beta, int k);

// Full pointwise interaction weight of the k-truncated model at a spin
// assignment phi[x] (unit vectors of length N).
double truncated_interaction_weight(const Graph& g, const std::vector<std::vector<double>>& phi,
                                    const ModelParams& p, int k);

}  // namespace spinpath
