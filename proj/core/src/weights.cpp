#include "spinpath/weights.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace spinpath {

double ModelParams::max_beta() const {
  double b = edge_beta.empty() ? beta : 0.0;
  for (double x : edge_beta) b = std::max(b, x);
  return b;
}

void ModelParams::validate() const {
  require(n_colours >= 1, Errc::UsageError, "n_colours must be >= 1");
  require(beta >= 0.0, Errc::UsageError, "beta must be nonnegative");
  for (double b : edge_beta) require(b >= 0.0, Errc::UsageError, "edge beta must be nonnegative");
  require(cap_orig >= 0 && cap_ghost >= 0, Errc::UsageError, "caps must be nonnegative");
}

void LogSumExp::add(double log_term) {
  if (log_term == kNegInf) return;
  ++count_;
  if (log_term <= max_) {
    sum_ += std::exp(log_term - max_);
  } else {
    sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
    max_ = log_term;
  }
}

void LogSumExp::merge(const LogSumExp& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.max_ <= max_) {
    sum_ += other.sum_ * std::exp(other.max_ - max_);
  } else {
    sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
    max_ = other.max_;
  }
  count_ += other.count_;
}

double LogSumExp::value() const { return count_ == 0 ? kNegInf : max_ + std::log(sum_); }

double log_odd_double_factorial(int n) {
  if (n <= 0) return 0.0;
  // (2n-1)!! = (2n)! / (2^n n!)
  return std::lgamma(2.0 * n + 1.0) - n * std::log(2.0) - std::lgamma(n + 1.0);
}

double site_weight_log(int r, int n_colours, double u_tilt) {
  const double half_n = 0.5 * n_colours;
  return std::lgamma(half_n) - r * std::log(2.0) - std::lgamma(r + half_n) + r * u_tilt;
}

double site_weight(int r, int n_colours) { return std::exp(site_weight_log(r, n_colours)); }

double sphere_moment_log(std::span<const int> exponents) {
  const int n_colours = static_cast<int>(exponents.size());
  require(n_colours >= 1, Errc::UsageError, "need at least one exponent");
  int total = 0;
  double dfs = 0.0;
  for (int e : exponents) {
    require(e >= 0, Errc::UsageError, "exponents must be nonnegative");
    total += e;
    dfs += log_odd_double_factorial(e);
  }
  return dfs + site_weight_log(total, n_colours);
}

double sphere_moment(std::span<const int> exponents) {
  return std::exp(sphere_moment_log(exponents));
}

namespace {

// Visit every composition of `total` into `parts` nonnegative entries.
template <typename F>
void for_each_composition(int total, int parts, std::vector<int>& buf, F&& visit) {
  if (parts == 1) {
    buf.push_back(total);
    visit(buf);
    buf.pop_back();
    return;
  }
  for (int first = 0; first <= total; ++first) {
    buf.push_back(first);
    for_each_composition(total - first, parts - 1, buf, visit);
    buf.pop_back();
  }
}

}  // namespace

double x_sup(int k, int n_colours) {
  require(k >= 0, Errc::UsageError, "k must be nonnegative");
  double best = kNegInf;
  std::vector<int> buf;
  for_each_composition(k, n_colours, buf, [&best](const std::vector<int>& comp) {
    best = std::max(best, sphere_moment_log(comp));
  });
  return std::exp(best);
}

double x_inf_up_to(int total_max, int n_colours) {
  require(total_max >= 0, Errc::UsageError, "total must be nonnegative");
  double worst = std::numeric_limits<double>::infinity();
  std::vector<int> buf;
  for (int total = 0; total <= total_max; ++total)
    for_each_composition(total, n_colours, buf, [&worst](const std::vector<int>& comp) {
      worst = std::min(worst, sphere_moment_log(comp));
    });
  return std::exp(worst);
}

double config_log_weight(const ExtendedGraph& g, const WireConfig& w, const ModelParams& p) {
  require(w.n_colours == p.n_colours, Errc::InvalidState, "colour count mismatch");
  StateClass sc = classify(g, w);
  require(sc.kind != StateClass::Kind::Invalid, Errc::InvalidState,
          "configuration outside the restricted state space");
  double logw = 0.0;
  for (EdgeId e = 0; e < g.original_edge_count(); ++e) {
    int m = w.m(e);
    if (m > p.cap_orig) return kNegInf;
    if (m == 0) continue;
    double b = p.beta_for(e);
    if (b <= 0.0) return kNegInf;
    logw += m * std::log(b) - std::lgamma(m + 1.0);
  }
  const double h = p.abs_h();
  for (Vertex x = 0; x < g.original_vertex_count(); ++x) {
    int m = w.m(g.ghost_edge(x));
    if (m > p.cap_ghost) return kNegInf;
    if (m == 0) continue;
    if (h <= 0.0) return kNegInf;
    logw += m * std::log(h) - std::lgamma(m + 1.0);
  }
  LocalTimes lt = local_times(g, w);
  for (Vertex x = 0; x < g.original_vertex_count(); ++x)
    logw += site_weight_log(lt.at(x), p.n_colours, p.u_tilt);
  return logw;
}

namespace {
double poisson_tail(double lambda, int cap) {
  if (lambda <= 0.0) return 0.0;
  if (cap == kUncapped) return 0.0;
  // sum_{m > cap} lambda^m / m! <= e^lambda lambda^(cap+1)/(cap+1)!
  return std::exp(lambda + (cap + 1.0) * std::log(lambda) - std::lgamma(cap + 2.0));
}
}  // namespace

double truncation_tail_bound(const ExtendedGraph& g, const ModelParams& p) {
  double tail = 0.0;
  for (EdgeId e = 0; e < g.original_edge_count(); ++e)
    tail += poisson_tail(p.n_colours * p.beta_for(e), p.cap_orig);
  tail += g.original_vertex_count() * poisson_tail(p.abs_h(), p.cap_ghost);
  return tail;
}

ConstantsReport constants_chain(const ModelParams& p, int d_star, int k, double eps,
                                int k_threshold_scan_limit) {
  p.validate();
  require(p.abs_h() > 0.0, Errc::FieldZero, "constants chain requires h != 0");
  require(eps > 0.0 && eps < 1.0, Errc::UsageError, "eps must lie in (0,1)");
  require(d_star >= 0 && k >= 0, Errc::UsageError, "d_star and k must be nonnegative");

  const double h = p.abs_h();
  const double beta = std::max(p.beta, p.max_beta());
  const int n = p.n_colours;

  ConstantsReport r;
  r.k = k;
  r.eps = eps;
  r.d_star = d_star;
  r.n_colours = n;
  r.beta = beta;
  r.h = h;
  r.k_script = x_inf_up_to((d_star + 1) / 2, n);
  r.x_sup_k = x_sup(k, n);
  const double env = std::exp(h + n * beta * (d_star + 1.0));
  r.c1 = r.x_sup_k * env / r.k_script;
  r.c5_upper = (k + 2.0) / (h * h);
  r.c4_lower = 1.0 / (1.0 + r.c5_upper);
  r.c6 = r.c4_lower / (k + 1.0);
  r.c3 = (1.0 / 40.0) * r.c4_lower * std::min(std::log(1.0 / r.c1), 1.0);
  r.tail_condition_met = 2.0 * d_star * std::pow(r.c1, eps) < std::exp(-1.0);

  r.k_threshold = -1;
  for (int kk = 0; kk <= k_threshold_scan_limit; ++kk) {
    // X_sup is attained by the fully concentrated composition (pairings of
    // merged exponents dominate the split ones); checked against the
    // exhaustive x_sup in the unit tests.
    double xs = std::exp(log_odd_double_factorial(kk) + site_weight_log(kk, n));
    double c1k = xs * env / r.k_script;
    if (2.0 * d_star * std::pow(c1k, eps) < std::exp(-1.0)) {
      r.k_threshold = kk;
      break;
    }
  }
  return r;
}

std::string ConstantsReport::to_json() const {
  nlohmann::json j;
  auto entry = [](double value, const std::string& formula) {
    return nlohmann::json{{"value", value}, {"formula", formula}};
  };
  j["k"] = k;
  j["eps"] = eps;
  j["d_star"] = d_star;
  j["N"] = n_colours;
  j["beta"] = beta;
  j["h"] = h;
  j["x_sup_k"] = entry(x_sup_k, "sup{X(n1..nN): sum n_i = k}");
  j["k_script"] = entry(k_script, "inf{X(n1..nN): sum n_i <= (d*+1)/2}");
  j["c1"] = entry(c1, "x_sup_k * exp(h + N*beta*(d*+1)) / k_script");
  j["c5_upper"] = entry(c5_upper, "(k+2)/h^2");
  j["c4_lower"] = entry(c4_lower, "1/(1 + c5_upper)");
  j["c6"] = entry(c6, "c4_lower/(k+1)");
  j["c3"] = entry(c3, "(1/40) * c4_lower * min{log(1/c1), 1}");
  j["tail_condition_met"] = tail_condition_met;
  j["tail_condition"] = "2 * d_star * c1^eps < exp(-1)";
  j["k_threshold"] = k_threshold;
  return j.dump(2);
}

double negative_binomial_ccdf(int ell, double c, int r) {
  require(ell >= 1 && c > 0.0 && c <= 1.0 && r >= 0, Errc::UsageError, "bad ccdf arguments");
  if (r < ell) return 1.0;
  double total = 0.0;
  for (int j = 0; j <= ell - 1; ++j) {
    double log_term = std::lgamma(r + 1.0) - std::lgamma(j + 1.0) - std::lgamma(r - j + 1.0) +
                      j * std::log(c) + (r - j) * std::log1p(-c);
    total += std::exp(log_term);
  }
  return std::min(total, 1.0);
}

}  // namespace spinpath
