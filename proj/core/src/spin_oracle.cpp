#include "spinpath/spin_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "spinpath/rng.hpp"

namespace spinpath {

double truncated_edge_factor(double dot, double beta, int k) {
  double term = 1.0, sum = 1.0;
  for (int l = 1; l <= k; ++l) {
    term *= beta * dot / l;
    sum += term;
  }
  return sum;
}

double truncated_interaction_weight(const Graph& g, const std::vector<std::vector<double>>& phi,
                                    const ModelParams& p, int k) {
  require(k >= 1, Errc::UsageError, "truncation order must be >= 1");
  require(static_cast<int>(phi.size()) == g.vertex_count(), Errc::UsageError,
          "one spin per vertex");
  double w = 1.0;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    double dot = 0.0;
    for (int i = 0; i < p.n_colours; ++i)
      dot += phi[static_cast<std::size_t>(ed.u)][static_cast<std::size_t>(i)] *
             phi[static_cast<std::size_t>(ed.v)][static_cast<std::size_t>(i)];
    w *= truncated_edge_factor(dot, p.beta_for(e), k);
  }
  double field = 0.0;
  for (Vertex x = 0; x < g.vertex_count(); ++x)
    field += phi[static_cast<std::size_t>(x)][static_cast<std::size_t>(p.n_colours - 1)];
  return w * std::exp(p.h * field);
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

struct NodeSet {
  std::vector<std::vector<double>> points;  // unit vectors, length N
  std::vector<double> weights;              // sum to 1 (uniform probability measure)
};

NodeSet sphere_nodes(int n_colours, int res) {
  NodeSet ns;
  if (n_colours == 2) {
    ns.points.reserve(static_cast<std::size_t>(res));
    for (int j = 0; j < res; ++j) {
      double th = 2.0 * M_PI * j / res;
      ns.points.push_back({std::cos(th), std::sin(th)});
      ns.weights.push_back(1.0 / res);
    }
    return ns;
  }
  if (n_colours == 3) {
    std::vector<double> t, wt;
    gauss_legendre(res, t, wt);
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j) {
        double psi = 2.0 * M_PI * j / res;
        double s = std::sqrt(std::max(0.0, 1.0 - t[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(i)]));
        ns.points.push_back({s * std::cos(psi), s * std::sin(psi), t[static_cast<std::size_t>(i)]});
        ns.weights.push_back(wt[static_cast<std::size_t>(i)] / 2.0 / res);
      }
    return ns;
  }
  fail(Errc::UnsupportedN, "product quadrature supports N in {2,3}");
}

struct Scaled {
  double mantissa = 0.0;
  double log_scale = 0.0;
  double value_log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

class QuadratureEngine {
 public:
  QuadratureEngine(const SpinIntegralSpec& spec, int res) : spec_(spec), nodes_(sphere_nodes(spec.params.n_colours, res)) {
    const Graph& g = *spec.graph;
    kernels_.reserve(static_cast<std::size_t>(g.edge_count()));
    const std::size_t np = nodes_.points.size();
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      std::vector<double> k(np * np);
      double beta = spec.params.beta_for(e);
      for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = 0; b < np; ++b) {
          double dot = 0.0;
          for (int i = 0; i < spec.params.n_colours; ++i)
            dot += nodes_.points[a][static_cast<std::size_t>(i)] * nodes_.points[b][static_cast<std::size_t>(i)];
          k[a * np + b] = spec.interaction == Interaction::Boltzmann
                              ? std::exp(beta * dot)
                              : truncated_edge_factor(dot, beta, spec.truncation_k);
        }
      kernels_.push_back(std::move(k));
    }
  }

  double ratio(bool* warn) {
    Scaled num = contract(true);
    Scaled den = contract(false);
    if (warn && std::abs(den.mantissa) < 1e-12) *warn = true;
    double sign = (num.mantissa < 0) != (den.mantissa < 0) ? -1.0 : 1.0;
    if (num.mantissa == 0.0) return 0.0;
    return sign * std::exp(num.value_log_abs() - den.value_log_abs());
  }

 private:
  double site_factor(Vertex x, std::size_t j, bool with_observable) const {
    const auto& pt = nodes_.points[j];
    double f = std::exp(spec_.params.h * pt[static_cast<std::size_t>(spec_.params.n_colours - 1)]);
    if (with_observable)
      for (Vertex a : spec_.observable)
        if (a == x) f *= pt[static_cast<std::size_t>(spec_.component - 1)];
    return f;
  }

  Scaled contract(bool with_observable) const {
    const Graph& g = *spec_.graph;
    std::vector<Vertex> order = path_order(g);
    if (!order.empty()) return contract_path(order, with_observable);
    return contract_brute(with_observable);
  }

  // Chain contraction for path graphs: cost O(L * nodes^2).
  Scaled contract_path(const std::vector<Vertex>& order, bool with_observable) const {
    const Graph& g = *spec_.graph;
    const std::size_t np = nodes_.points.size();
    Scaled out;
    std::vector<double> vec(np);
    for (std::size_t j = 0; j < np; ++j)
      vec[j] = nodes_.weights[j] * site_factor(order[0], j, with_observable);
    for (std::size_t i = 1; i < order.size(); ++i) {
      EdgeId e = g.edge_id(order[i - 1], order[i]);
      const auto& k = kernels_[static_cast<std::size_t>(e)];
      std::vector<double> next(np, 0.0);
      for (std::size_t a = 0; a < np; ++a) {
        if (vec[a] == 0.0) continue;
        const double va = vec[a];
        const double* row = &k[a * np];
        for (std::size_t b = 0; b < np; ++b) next[b] += va * row[b];
      }
      double mx = 0.0;
      for (std::size_t b = 0; b < np; ++b) {
        next[b] *= nodes_.weights[b] * site_factor(order[i], b, with_observable);
        mx = std::max(mx, std::abs(next[b]));
      }
      if (mx > 0.0) {
        for (auto& v : next) v /= mx;
        out.log_scale += std::log(mx);
      }
      vec = std::move(next);
    }
    for (double v : vec) out.mantissa += v;
    return out;
  }

  Scaled contract_brute(bool with_observable) const {
    const Graph& g = *spec_.graph;
    const std::size_t np = nodes_.points.size();
    const int n = g.vertex_count();
    double total_points = std::pow(static_cast<double>(np), n);
    require(total_points <= static_cast<double>(spec_.budget), Errc::BudgetExceeded,
            "quadrature grid exceeds the evaluation budget");
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    Scaled out;
    double running_max = 0.0;
    double sum = 0.0;
    while (true) {
      double term = 1.0;
      for (Vertex x = 0; x < n; ++x)
        term *= nodes_.weights[idx[static_cast<std::size_t>(x)]] *
                site_factor(x, idx[static_cast<std::size_t>(x)], with_observable);
      for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        term *= kernels_[static_cast<std::size_t>(e)]
                        [idx[static_cast<std::size_t>(ed.u)] * np + idx[static_cast<std::size_t>(ed.v)]];
      }
      sum += term;
      running_max = std::max(running_max, std::abs(term));
      int pos = 0;
      while (pos < n) {
        if (++idx[static_cast<std::size_t>(pos)] < np) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == n) break;
    }
    (void)running_max;
    out.mantissa = sum;
    return out;
  }

  // Vertex order along the path, empty when the graph is not a path.
  static std::vector<Vertex> path_order(const Graph& g) {
    const int n = g.vertex_count();
    if (n == 1) return {0};
    Vertex start = -1;
    for (Vertex x = 0; x < n; ++x) {
      if (g.degree(x) > 2) return {};
      if (g.degree(x) == 1 && start < 0) start = x;
    }
    if (start < 0) return {};  // cycle or disconnected 2-regular parts
    std::vector<Vertex> order{start};
    Vertex prev = -1, cur = start;
    while (static_cast<int>(order.size()) < n) {
      Vertex next = -1;
      for (Vertex nb : g.neighbours(cur))
        if (nb != prev) next = nb;
      if (next < 0) return {};  // disconnected
      order.push_back(next);
      prev = cur;
      cur = next;
    }
    return order;
  }

  const SpinIntegralSpec& spec_;
  NodeSet nodes_;
  std::vector<std::vector<double>> kernels_;
};

SpinEstimate monte_carlo(const SpinIntegralSpec& spec) {
  const Graph& g = *spec.graph;
  const int n = g.vertex_count();
  const int nc = spec.params.n_colours;
  require(nc >= 2, Errc::UnsupportedN, "Monte Carlo sphere sampling needs N >= 2");
  const int batches = 50;
  const std::uint64_t per_batch = std::max<std::uint64_t>(1, spec.samples / batches);

  std::vector<double> num_b(batches, 0.0), den_b(batches, 0.0);
  std::vector<std::vector<double>> phi(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(nc)));
  Rng root(spec.seed);
  for (int b = 0; b < batches; ++b) {
    Rng rng = root.split(static_cast<std::uint64_t>(b));
    for (std::uint64_t s = 0; s < per_batch; ++s) {
      for (Vertex x = 0; x < n; ++x) {
        double norm2 = 0.0;
        for (int i = 0; i < nc; ++i) {
          double gsn = rng.normal();
          phi[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)] = gsn;
          norm2 += gsn * gsn;
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < nc; ++i) phi[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)] *= inv;
      }
      double w = 1.0;
      for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        double dot = 0.0;
        for (int i = 0; i < nc; ++i)
          dot += phi[static_cast<std::size_t>(ed.u)][static_cast<std::size_t>(i)] *
                 phi[static_cast<std::size_t>(ed.v)][static_cast<std::size_t>(i)];
        w *= spec.interaction == Interaction::Boltzmann
                 ? std::exp(spec.params.beta_for(e) * dot)
                 : truncated_edge_factor(dot, spec.params.beta_for(e), spec.truncation_k);
      }
      double field = 0.0;
      for (Vertex x = 0; x < n; ++x)
        field += phi[static_cast<std::size_t>(x)][static_cast<std::size_t>(nc - 1)];
      w *= std::exp(spec.params.h * field);
      double f = 1.0;
      for (Vertex a : spec.observable)
        f *= phi[static_cast<std::size_t>(a)][static_cast<std::size_t>(spec.component - 1)];
      num_b[static_cast<std::size_t>(b)] += f * w;
      den_b[static_cast<std::size_t>(b)] += w;
    }
  }
  double num = 0.0, den = 0.0;
  for (int b = 0; b < batches; ++b) {
    num += num_b[static_cast<std::size_t>(b)];
    den += den_b[static_cast<std::size_t>(b)];
  }
  // Jackknife over batches for the ratio estimator.
  double mean = num / den;
  std::vector<double> loo(batches);
  for (int b = 0; b < batches; ++b)
    loo[static_cast<std::size_t>(b)] =
        (num - num_b[static_cast<std::size_t>(b)]) / (den - den_b[static_cast<std::size_t>(b)]);
  double loo_mean = 0.0;
  for (double v : loo) loo_mean += v;
  loo_mean /= batches;
  double var = 0.0;
  for (double v : loo) var += (v - loo_mean) * (v - loo_mean);
  var *= static_cast<double>(batches - 1) / batches;

  double den_mean = den / batches;
  double den_var = 0.0;
  for (int b = 0; b < batches; ++b) {
    double d = den_b[static_cast<std::size_t>(b)] - den_mean;
    den_var += d * d;
  }
  den_var /= (batches - 1.0) * batches;

  SpinEstimate est;
  est.estimate = mean;
  est.stderr_ = std::sqrt(var);
  est.method = "monte_carlo";
  est.nodes_or_samples = per_batch * batches;
  est.seed = spec.seed;
  est.denominator_warning = std::abs(den_mean) < 5.0 * std::sqrt(den_var * batches);
  return est;
}

}  // namespace

SpinEstimate spin_correlation(const SpinIntegralSpec& spec) {
  require(spec.graph != nullptr, Errc::UsageError, "spin oracle needs a graph");
  require(spec.component >= 1 && spec.component <= spec.params.n_colours, Errc::UsageError,
          "component out of range");
  for (Vertex a : spec.observable) spec.graph->check_vertex(a);
  if (spec.interaction == Interaction::Truncated)
    require(spec.truncation_k >= 1, Errc::UsageError, "truncation order must be >= 1");
  if (spec.observable.empty()) {
    SpinEstimate one;
    one.estimate = 1.0;
    one.method = spec.method == SpinMethod::MonteCarlo ? "monte_carlo" : "product_quadrature";
    one.seed = spec.seed;
    return one;
  }
  if (spec.method == SpinMethod::MonteCarlo) return monte_carlo(spec);

  const int res = std::max(8, spec.nodes);
  bool warn = false;
  QuadratureEngine coarse(spec, res / 4);
  QuadratureEngine mid(spec, res / 2);
  QuadratureEngine fine(spec, res);
  double e0 = coarse.ratio(nullptr);
  double e1 = mid.ratio(nullptr);
  double e2 = fine.ratio(&warn);
  double delta_fine = std::abs(e2 - e1);
  double delta_coarse = std::abs(e1 - e0);
  if (delta_fine > 1e-9 && delta_fine > delta_coarse)
    fail(Errc::NonConvergence, "quadrature refinement delta is not shrinking");
  SpinEstimate est;
  est.estimate = e2;
  est.stderr_ = delta_fine;
  est.method = "product_quadrature";
  est.nodes_or_samples = static_cast<std::uint64_t>(res);
  est.seed = spec.seed;
  est.denominator_warning = warn;
  return est;
}

std::string SpinEstimate::to_json() const {
  nlohmann::json j;
  j["estimate"] = estimate;
  j["stderr"] = stderr_;
  j["method"] = method;
  j["nodes_or_samples"] = nodes_or_samples;
  j["seed"] = seed;
  if (denominator_warning) j["denominator_warning"] = true;
  return j.dump(2);
}

}  // namespace spinpath
