#include <cmath>

#include "doctest.h"
#include "spinpath/experiments.hpp"
#include "spinpath/mcmc.hpp"

using namespace spinpath;

namespace {

ModelParams params(int n, double beta, double h, int cap, int capg) {
  ModelParams p;
  p.n_colours = n;
  p.beta = beta;
  p.h = h;
  p.cap_orig = cap;
  p.cap_ghost = capg;
  return p;
}

}  // namespace

TEST_CASE("chain is frozen at beta = h = 0") {
  ExtendedGraph g(make_path(3));
  WormChain chain(g, params(2, 0.0, 0.0, 3, 3), 5);
  chain.steps(20'000);
  CHECK(chain.config().total_links() == 0);
  CHECK(chain.log_weight() == doctest::Approx(0.0));
}

TEST_CASE("each insert composed with its reverse is the identity") {
  ExtendedGraph g(make_cycle(3));
  WormChain chain(g, params(2, 0.7, 0.9, 4, 4), 1);
  const std::string empty_key = canonical_key(chain.config());

  SUBCASE("orig pair") {
    chain.apply_insert_orig_pair(0, 1);
    CHECK(chain.deletable_pair_at_end(0));
    chain.apply_delete_orig_pair(0);
    CHECK(canonical_key(chain.config()) == empty_key);
    CHECK(chain.log_weight() == doctest::Approx(0.0));
  }
  SUBCASE("ghost pair") {
    chain.apply_insert_ghost_pair(1);
    chain.apply_delete_ghost_pair(1);
    CHECK(canonical_key(chain.config()) == empty_key);
    CHECK(chain.log_weight() == doctest::Approx(0.0));
  }
  SUBCASE("walk unit") {
    chain.apply_insert_walk(2);
    CHECK(chain.deletable_walk_at_end(2));
    chain.apply_delete_walk(2);
    CHECK(canonical_key(chain.config()) == empty_key);
    CHECK(chain.log_weight() == doctest::Approx(0.0));
  }
  SUBCASE("cycle unit") {
    REQUIRE(chain.cycle_basis().size() == 1);
    chain.apply_insert_cycle(0, 2);
    CHECK(chain.deletable_cycle_at_end(0));
    chain.apply_delete_cycle(0);
    CHECK(canonical_key(chain.config()) == empty_key);
    CHECK(chain.log_weight() == doctest::Approx(0.0));
  }
  SUBCASE("transplant forth and back") {
    chain.apply_insert_orig_pair(0, 2);
    const std::string before = canonical_key(chain.config());
    double lw = chain.log_weight();
    chain.apply_transplant(0, 1);
    chain.apply_transplant(1, 0);
    CHECK(canonical_key(chain.config()) == before);
    CHECK(chain.log_weight() == doctest::Approx(lw));
  }
}

TEST_CASE("walk units reach odd link counts") {
  // Every move preserving per-edge parity would never reach a single
  // stretched N-walk; the walk unit does.
  ExtendedGraph g(make_path(2));
  WormChain chain(g, params(2, 0.8, 1.2, 2, 2), 3);
  bool seen_odd = false;
  for (int s = 0; s < 50'000 && !seen_odd; ++s) {
    chain.step();
    if (chain.config().m(0) % 2 == 1) seen_odd = true;
  }
  CHECK(seen_odd);
}

TEST_CASE("chain states stay structurally valid with consistent caches") {
  ExtendedGraph g(make_cycle(3));
  WormChain chain(g, params(3, 0.6, 0.8, 2, 3), 11);
  for (int block = 0; block < 20; ++block) {
    chain.steps(1'000);
    validate_structure(g, chain.config());
    CHECK(classify(g, chain.config()).kind == StateClass::Kind::LoopsOnly);
    chain.check_cache();
  }
  const MoveStats& st = chain.stats();
  for (int t = 0; t < kMoveTypeCount; ++t)
    CHECK(st.accepted[static_cast<std::size_t>(t)] <= st.proposed[static_cast<std::size_t>(t)]);
  CHECK(st.acceptance_rate() > 0.0);
}

TEST_CASE("caps are respected") {
  ExtendedGraph g(make_path(2));
  ModelParams p = params(2, 2.0, 2.0, 2, 2);
  WormChain chain(g, p, 7);
  for (int s = 0; s < 30'000; ++s) {
    chain.step();
    for (EdgeId e = 0; e < g.original_edge_count(); ++e) CHECK(chain.config().m(e) <= 2);
    for (Vertex x = 0; x < 2; ++x) CHECK(chain.config().m(g.ghost_edge(x)) <= 2);
  }
}

TEST_CASE("empirical law matches the exact table on P2") {
  ExtendedGraph g(make_path(2));
  ModelParams p = params(2, 0.6, 0.9, 2, 2);
  ConditionalTable table = stationary_table(g, p);
  WormChain chain(g, p, 42);
  chain.steps(20'000);
  std::unordered_map<std::string, std::uint64_t> counts;
  const std::uint64_t total = 150'000;
  for (std::uint64_t s = 0; s < total; ++s) {
    chain.steps(4);
    counts[canonical_key(chain.config())] += 1;
  }
  CHECK(tv_distance(counts, total, table) < 0.02);
}

TEST_CASE("estimates") {
  SUBCASE("M vanishes identically at h = 0") {
    ExtendedGraph g(make_path(2));
    Observable m;
    m.kind = Observable::Kind::WalkCount;
    m.x = 0;
    m.y = 1;
    McmcSchedule sched;
    sched.burn_in = 1'000;
    sched.steps = 20'000;
    sched.thin = 4;
    auto est = mcmc_estimate(g, params(2, 0.7, 0.0, 3, 3), {m}, sched, 3);
    CHECK(est[0].mean == doctest::Approx(0.0));
    CHECK(est[0].stderr_ == doctest::Approx(0.0));
  }
  SUBCASE("M/h^2 agrees with the exact two-point function on P3") {
    ExtendedGraph g(make_path(3));
    ModelParams p = params(2, 0.6, 0.9, 2, 3);
    Observable m;
    m.kind = Observable::Kind::WalkCount;
    m.x = 0;
    m.y = 2;
    McmcSchedule sched;
    sched.burn_in = 20'000;
    sched.steps = 600'000;
    sched.thin = 6;
    auto est = mcmc_estimate(g, p, {m}, sched, 17);
    EnumerationSpec spec{&g, p, EnumMode::ExplicitPairings};
    double exact = expected_mxy(spec, 0, 2);
    CHECK(std::abs(est[0].mean - exact) <= 3.0 * est[0].stderr_ + 1e-4);
  }
  SUBCASE("local-time tail indicator against the c1 bound") {
    ExtendedGraph g(make_path(3));
    ModelParams p = params(2, 0.1, 0.3, 4, 6);
    Observable ind;
    ind.kind = Observable::Kind::AllLocalTimesGeq;
    ind.a = {1};
    ind.k = 8;
    Observable gh;
    gh.kind = Observable::Kind::GhostLinksTimesInd;
    gh.z = 1;
    gh.a = {1};
    gh.k = 8;
    McmcSchedule sched;
    sched.burn_in = 5'000;
    sched.steps = 200'000;
    sched.thin = 4;
    auto est = mcmc_estimate(g, p, {ind, gh}, sched, 23);
    ConstantsReport cons = constants_chain(p, 2, 8, 0.1);
    CHECK(est[0].mean <= cons.c1 + 3.0 * est[0].stderr_);
    CHECK(est[1].mean <= p.h * cons.c1 + 3.0 * est[1].stderr_);
  }
  SUBCASE("NotEquilibrated fires under an impossible budget") {
    ExtendedGraph g(make_path(2));
    Observable m;
    m.kind = Observable::Kind::GhostLinks;
    m.z = 0;
    McmcSchedule sched;
    sched.burn_in = 100;
    sched.steps = 50'000;
    sched.thin = 1;
    sched.max_iat_fraction = 1e-9;
    CHECK_THROWS_AS(mcmc_estimate(g, params(2, 0.6, 0.9, 2, 2), {m}, sched, 5), Error);
  }
}

TEST_CASE("path event observable") {
  ExtendedGraph g(make_path(3));
  WireConfig w = WireConfig::empty(g, 2);
  LocalTimes lt = local_times(g, w);
  Observable ev;
  ev.kind = Observable::Kind::PathEvent;
  ev.x = 0;
  ev.y = 2;
  ev.k = 0;
  ev.eps = 0.5;
  // empty config: n = 0 everywhere, no vertex exceeds k = 0
  CHECK(ev.evaluate(g, w, lt) == doctest::Approx(0.0));
}
