#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spinpath/wire.hpp"

namespace spinpath {

constexpr int kUncapped = std::numeric_limits<int>::max();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct ModelParams {
  int n_colours = 2;   // N
  double beta = 0.0;   // uniform coupling; edge_beta overrides per original edge
  double h = 0.0;      // external field; the engine works with |h| throughout
  std::vector<double> edge_beta;
  int cap_orig = kUncapped;   // max links per original edge
  int cap_ghost = kUncapped;  // max links per ghost edge
  double u_tilt = 0.0;        // test seam: multiplies the on-site weight by e^{r*u_tilt}

  double beta_for(EdgeId e) const {
    return edge_beta.empty() ? beta : edge_beta[static_cast<std::size_t>(e)];
  }
  double max_beta() const;
  double abs_h() const { return h < 0 ? -h : h; }
  bool capped() const { return cap_orig != kUncapped && cap_ghost != kUncapped; }
  void validate() const;
};

// Streaming log-sum-exp with deterministic sequential accumulation.
class LogSumExp {
 public:
  void add(double log_term);
  void merge(const LogSumExp& other);  // combine partials in a fixed order
  double value() const;
  bool empty() const { return count_ == 0; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

// log((2n-1)!!), the number of perfect pairings of 2n points; 0 at n = 0.
double log_odd_double_factorial(int n);

// On-site weight U(r) = Gamma(N/2) / (2^r Gamma(r + N/2)), in logs.
// The optional tilt term r*u_tilt is the mutation hook used by the
// verification suite; it is zero in normal operation.
double site_weight_log(int r, int n_colours, double u_tilt = 0.0);
double site_weight(int r, int n_colours);

// Moment of the uniform probability measure on the (N-1)-sphere:
//   X(n1..nN) = prod_i (2 n_i - 1)!! * Gamma(N/2) / (2^s Gamma(s + N/2)),  s = sum n_i.
double sphere_moment_log(std::span<const int> exponents);
double sphere_moment(std::span<const int> exponents);

// Extremes of X over compositions (exhaustive enumeration).
double x_sup(int k, int n_colours);                       // sup over sum = k
double x_inf_up_to(int total_max, int n_colours);         // inf over sum <= total_max

// log mu(w) per the wire-configuration measure: per-edge beta^m/m!, per-ghost
// |h|^m/m!, per-vertex U(n_x). Returns -inf for zero-weight configurations
// (h = 0 with ghost links, beta_e = 0 with links on e, or caps exceeded).
// Throws InvalidState if w lies outside the restricted state space.
double config_log_weight(const ExtendedGraph& g, const WireConfig& w, const ModelParams& p);

// Bound on the relative weight mass excluded by finite caps: a per-edge
// Poisson tail e^l l^(C+1)/(C+1)! with the vertex factors bounded by one
// (each added pair multiplies pairing growth by (q^i+1) and the on-site
// weight by 1/(2n+N) <= 1/(q^i+... ) for N >= 2), summed over edges.
double truncation_tail_bound(const ExtendedGraph& g, const ModelParams& p);

// The explicit decay-constant chain. Every field is annotated with its
// defining formula in the JSON serialization.
struct ConstantsReport {
  int k = 0;
  double eps = 0.0;
  int d_star = 0;
  int n_colours = 0;
  double beta = 0.0;
  double h = 0.0;
  double x_sup_k = 0.0;     // X_sup(k)
  double k_script = 0.0;    // inf of X over sum <= (d*+1)/2
  double c1 = 0.0;          // X_sup(k) e^{h + N beta (d*+1)} / k_script
  double c5_upper = 0.0;    // (k+2)/h^2
  double c4_lower = 0.0;    // 1/(1 + c5_upper)
  double c6 = 0.0;          // c4/(k+1)
  double c3 = 0.0;          // (1/40) c4 min{log(1/c1), 1}
  bool tail_condition_met = false;  // 2 d* c1^eps < e^{-1} at this k
  long long k_threshold = -1;       // smallest k meeting the tail condition (-1: not in scan range)
  std::string to_json() const;
};

ConstantsReport constants_chain(const ModelParams& p, int d_star, int k, double eps,
                                int k_threshold_scan_limit = 400);

// CCDF of a sum of ell iid geometric(success c) variables on {1,2,...}:
// P(sum > r) = P(fewer than ell successes in r trials).
double negative_binomial_ccdf(int ell, double c, int r);

}  // namespace spinpath
