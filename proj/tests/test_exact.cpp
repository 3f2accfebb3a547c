#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "spinpath/exact.hpp"

using namespace spinpath;

namespace {

ModelParams params(int n, double beta, double h, int cap, int cap_ghost) {
  ModelParams p;
  p.n_colours = n;
  p.beta = beta;
  p.h = h;
  p.cap_orig = cap;
  p.cap_ghost = cap_ghost;
  return p;
}

}  // namespace

TEST_CASE("trivial partition functions") {
  SUBCASE("beta = h = 0 leaves only the empty configuration") {
    ExtendedGraph g(make_grid(2, 2));
    EnumerationSpec spec{&g, params(2, 0.0, 0.0, 3, 3)};
    PartitionResult res = enumerate_partition(spec, ClassSpec::loops_only());
    CHECK(res.log_z == doctest::Approx(0.0));
    CHECK(res.term_count == 1);
  }
  SUBCASE("single vertex, N=2, beta=0: Z = 1 + h^2/4") {
    ExtendedGraph g(Graph::build({}, 1));
    for (double h : {0.3, 0.8, 1.5}) {
      EnumerationSpec spec{&g, params(2, 0.0, h, 2, 2)};
      PartitionResult res = enumerate_partition(spec, ClassSpec::loops_only());
      CHECK(std::exp(res.log_z) == doctest::Approx(1.0 + h * h / 4.0));
    }
  }
}

TEST_CASE("aggregate and explicit-pairings modes agree exactly") {
  struct Inst {
    Graph graph;
    int n;
    int cap, capg;
  };
  std::vector<Inst> matrix;
  matrix.push_back({Graph::build({}, 1), 3, 3, 3});
  matrix.push_back({make_path(2), 2, 3, 3});
  matrix.push_back({make_path(2), 3, 3, 3});
  matrix.push_back({make_path(3), 2, 2, 2});
  matrix.push_back({make_path(3), 3, 2, 2});
  matrix.push_back({make_cycle(3), 2, 2, 2});
  for (auto& inst : matrix) {
    ExtendedGraph g(inst.graph);
    for (auto cls : {ClassSpec::loops_only(),
                     inst.graph.vertex_count() >= 2 ? ClassSpec::open_pair(0, 1)
                                                    : ClassSpec::loops_only()}) {
      EnumerationSpec agg{&g, params(inst.n, 0.4, 0.8, inst.cap, inst.capg), EnumMode::Aggregate};
      EnumerationSpec expl = agg;
      expl.mode = EnumMode::ExplicitPairings;
      double za = enumerate_partition(agg, cls).log_z;
      double ze = enumerate_partition(expl, cls).log_z;
      if (za == kNegInf) {
        CHECK(ze == kNegInf);
      } else {
        CHECK(std::abs(za - ze) <= 1e-12 * std::max(1.0, std::abs(za)));
      }
    }
  }
}

TEST_CASE("deterministic parallel split") {
  ExtendedGraph g(make_path(3));
  EnumerationSpec one{&g, params(2, 0.6, 0.9, 3, 4)};
  EnumerationSpec two = one;
  two.threads = 2;
  PartitionResult r1 = enumerate_partition(one, ClassSpec::loops_only());
  PartitionResult r2 = enumerate_partition(two, ClassSpec::loops_only());
  PartitionResult r3 = enumerate_partition(two, ClassSpec::loops_only());
  // partials merge in branch order: bitwise stable given the split
  CHECK(r2.log_z == r3.log_z);
  CHECK(std::abs(r1.log_z - r2.log_z) <= 1e-12 * std::abs(r1.log_z));
  CHECK(r1.term_count == r2.term_count);
}

TEST_CASE("two-point function") {
  SUBCASE("beta = 0 disconnects") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.0, 0.7, 3, 3)};
    CHECK(two_point(spec, 0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("positive and symmetric") {
    ExtendedGraph g(make_path(3));
    EnumerationSpec spec{&g, params(2, 0.5, 1.0, 3, 4)};
    double a = two_point(spec, 0, 2), b = two_point(spec, 2, 0);
    CHECK(a > 0.0);
    CHECK(a == doctest::Approx(b));
  }
  SUBCASE("log Z nondecreasing in each cap") {
    ExtendedGraph g(make_path(2));
    double prev = -1e30;
    for (int cap = 1; cap <= 5; ++cap) {
      EnumerationSpec spec{&g, params(2, 0.8, 1.0, cap, 4)};
      double z = enumerate_partition(spec, ClassSpec::loops_only()).log_z;
      CHECK(z >= prev - 1e-13);
      prev = z;
    }
    prev = -1e30;
    for (int capg = 0; capg <= 5; ++capg) {
      EnumerationSpec spec{&g, params(2, 0.8, 1.0, 3, capg)};
      double z = enumerate_partition(spec, ClassSpec::loops_only()).log_z;
      CHECK(z >= prev - 1e-13);
      prev = z;
    }
  }
}

TEST_CASE("explicit enumeration emits exactly the requested class") {
  ExtendedGraph g(make_path(3));
  ModelParams p = params(2, 0.5, 0.8, 2, 2);
  int seen = 0;
  for_each_explicit_config(g, p, ClassSpec::open_pair(0, 2), 1'000'000,
                           [&](const WireConfig& w, double) {
                             StateClass sc = classify(g, w);
                             REQUIRE(sc.kind == StateClass::Kind::OpenPair);
                             CHECK(sc.x == 0);
                             CHECK(sc.y == 2);
                             ++seen;
                           });
  CHECK(seen > 0);
}

TEST_CASE("expected M_xy") {
  SUBCASE("mode gate") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.5, 1.0, 2, 2), EnumMode::Aggregate};
    CHECK_THROWS_AS(expected_mxy(spec, 0, 1), Error);
  }
  SUBCASE("h = 0 and beta = 0 give zero") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.5, 0.0, 2, 2), EnumMode::ExplicitPairings};
    CHECK(expected_mxy(spec, 0, 1) == doctest::Approx(0.0));
    EnumerationSpec spec2{&g, params(2, 0.0, 1.0, 2, 2), EnumMode::ExplicitPairings};
    CHECK(expected_mxy(spec2, 0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("revelation route matches literal pairing enumeration") {
    struct Inst {
      Graph graph;
      int n;
      Vertex x, y;
      int cap, capg;
    };
    std::vector<Inst> matrix;
    matrix.push_back({make_path(2), 2, 0, 1, 2, 3});
    matrix.push_back({make_path(2), 3, 0, 1, 2, 2});
    matrix.push_back({make_path(3), 2, 0, 2, 2, 2});
    matrix.push_back({make_path(3), 2, 0, 1, 2, 2});
    matrix.push_back({make_cycle(3), 2, 0, 2, 2, 2});
    for (auto& inst : matrix) {
      ExtendedGraph g(inst.graph);
      EnumerationSpec spec{&g, params(inst.n, 0.6, 0.9, inst.cap, inst.capg),
                           EnumMode::ExplicitPairings};
      double fast = expected_mxy(spec, inst.x, inst.y);
      double literal = expected_mxy_literal(spec, inst.x, inst.y);
      CHECK(fast == doctest::Approx(literal).epsilon(1e-10));
      CHECK(fast > 0.0);
    }
  }
}

TEST_CASE("colour switch convergence") {
  SUBCASE("beta = 0: both sides vanish at every cap") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.0, 0.6, 2, 2)};
    auto rep = verify_colour_switch(spec, 0, 1, {2, 3, 4});
    for (double d : rep.delta) CHECK(d == doctest::Approx(0.0));
  }
  SUBCASE("P2: delta shrinks along caps and M <= m_xg stays sane") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.5, 0.5, 2, 2)};
    auto rep = verify_colour_switch(spec, 0, 1, {2, 6});
    CHECK(rep.delta.back() < rep.delta.front());
    CHECK(rep.final_delta < 1e-4);
  }
  SUBCASE("P3 endpoints, N=3") {
    ExtendedGraph g(make_path(3));
    EnumerationSpec spec{&g, params(3, 0.3, 1.0, 2, 2)};
    auto rep = verify_colour_switch(spec, 0, 2, {2, 4, 6});
    CHECK(rep.strictly_decreasing);
    CHECK(rep.final_delta < 1e-4);
  }
}

TEST_CASE("conditional distribution") {
  SUBCASE("single vertex, no original links") {
    ExtendedGraph g(Graph::build({}, 1));
    const double h = 0.8;
    EnumerationSpec spec{&g, params(2, 0.0, h, 2, 2)};
    ConditionalTable table = conditional_distribution(spec, EdgeData::empty(g));
    REQUIRE(table.configs.size() == 2);  // 0 or 2 ghost links
    double z = 1.0 + h * h / 4.0;
    for (std::size_t i = 0; i < table.configs.size(); ++i) {
      int m = table.configs[i].m(g.ghost_edge(0));
      if (m == 0) CHECK(table.prob[i] == doctest::Approx(1.0 / z));
      if (m == 2) CHECK(table.prob[i] == doctest::Approx((h * h / 4.0) / z));
    }
  }
  SUBCASE("odd colour-1 degree is inadmissible") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.5, 0.8, 2, 2)};
    EdgeData bad = EdgeData::empty(g);
    bad.m[0] = 1;
    bad.colours[0] = {1};
    CHECK_THROWS_AS(conditional_distribution(spec, bad), Error);
  }
  SUBCASE("odd colour-N degree is admissible (ghost parity completes)") {
    ExtendedGraph g(make_path(2));
    EnumerationSpec spec{&g, params(2, 0.5, 0.8, 2, 3)};
    EdgeData cond = EdgeData::empty(g);
    cond.m[0] = 1;
    cond.colours[0] = {2};
    ConditionalTable table = conditional_distribution(spec, cond);
    CHECK(!table.configs.empty());
    double total = 0.0;
    for (double pr : table.prob) total += pr;
    CHECK(total == doctest::Approx(1.0));
    for (const auto& w : table.configs) CHECK(w.m(g.ghost_edge(0)) % 2 == 1);
  }
  SUBCASE("marginal matches an aggregate-visitor ratio") {
    ExtendedGraph g(make_path(2));
    ModelParams p = params(2, 0.7, 0.9, 2, 4);
    EnumerationSpec spec{&g, p, EnumMode::ExplicitPairings};
    EdgeData cond = EdgeData::empty(g);
    cond.m[0] = 2;
    cond.colours[0] = {2, 2};
    ConditionalTable table = conditional_distribution(spec, cond);
    // P(ghost count at vertex 0 equals 2)
    double marginal = 0.0;
    for (std::size_t i = 0; i < table.configs.size(); ++i)
      if (table.configs[i].m(g.ghost_edge(0)) == 2) marginal += table.prob[i];

    auto counts = cond.colour_counts(g, p.n_colours);
    LogSumExp num, den;
    for_each_aggregate(g, p, ClassSpec::loops_only(), 1'000'000, [&](const AggregateView& v) {
      for (EdgeId e = 0; e < g.original_edge_count(); ++e)
        for (int i = 0; i < p.n_colours; ++i)
          if (v.edge_counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)] !=
              counts[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)])
            return;
      den.add(v.log_weight);
      if (v.ghost_counts[0] == 2) num.add(v.log_weight);
    });
    CHECK(std::exp(num.value() - den.value()) == doctest::Approx(marginal).epsilon(1e-10));
  }
}

TEST_CASE("guards") {
  ExtendedGraph g(make_path(2));
  SUBCASE("infinite caps are rejected") {
    EnumerationSpec spec{&g, params(2, 0.5, 0.5, kUncapped, 2)};
    CHECK_THROWS_AS(enumerate_partition(spec, ClassSpec::loops_only()), Error);
  }
  SUBCASE("budget exceeded") {
    EnumerationSpec spec{&g, params(2, 0.5, 0.5, 3, 3)};
    spec.budget = 2;
    CHECK_THROWS_AS(enumerate_partition(spec, ClassSpec::loops_only()), Error);
    try {
      enumerate_partition(spec, ClassSpec::loops_only());
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BudgetExceeded);
    }
  }
}
