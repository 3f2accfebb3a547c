#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "spinpath/exact.hpp"
#include "spinpath/rng.hpp"

namespace spinpath::testing {

// Brute-force count of partial matchings of q labelled points with exactly u
// left unmatched (independent of the factorial formula under test).
inline long long brute_force_pairings(int q, int u) {
  if (q == 0) return u == 0 ? 1 : 0;
  if (u > q) return 0;
  long long total = 0;
  if (u > 0) total += brute_force_pairings(q - 1, u - 1);
  if (q >= 2) total += (q - 1) * brute_force_pairings(q - 2, u);
  return total;
}

// Monte Carlo moment of the uniform measure on the (N-1)-sphere.
struct SphereMc {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline SphereMc sphere_moment_mc(const std::vector<int>& exponents, std::uint64_t samples,
                                 Rng& rng) {
  const int n = static_cast<int>(exponents.size());
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> phi(static_cast<std::size_t>(n));
  for (std::uint64_t s = 0; s < samples; ++s) {
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      phi[static_cast<std::size_t>(i)] = rng.normal();
      norm2 += phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
    }
    double term = 1.0;
    for (int i = 0; i < n; ++i) {
      double c2 = phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)] / norm2;
      for (int e = 0; e < exponents[static_cast<std::size_t>(i)]; ++e) term *= c2;
    }
    sum += term;
    sum2 += term * term;
  }
  SphereMc out;
  out.mean = sum / static_cast<double>(samples);
  double var = sum2 / static_cast<double>(samples) - out.mean * out.mean;
  out.stderr_ = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
  return out;
}

// Hand-buildable wire fixtures used across the tests.
struct PairSpec {
  Vertex at;
  Link a, b;
};

inline WireConfig build_config(const ExtendedGraph& g, int n_colours,
                               const std::vector<std::pair<EdgeId, std::vector<int>>>& links,
                               const std::vector<PairSpec>& pairs) {
  WireConfig w = WireConfig::empty(g, n_colours);
  for (const auto& [e, cols] : links) {
    w.colours[static_cast<std::size_t>(e)] = cols;
    w.partner[static_cast<std::size_t>(e)].assign(cols.size(), {Link{}, Link{}});
  }
  for (const auto& p : pairs) {
    int sa = edge_side(g, p.a.edge, p.at), sb = edge_side(g, p.b.edge, p.at);
    w.partner[static_cast<std::size_t>(p.a.edge)][static_cast<std::size_t>(p.a.index)][static_cast<std::size_t>(sa)] = p.b;
    w.partner[static_cast<std::size_t>(p.b.edge)][static_cast<std::size_t>(p.b.index)][static_cast<std::size_t>(sb)] = p.a;
  }
  validate_structure(g, w);
  return w;
}

}  // namespace spinpath::testing
