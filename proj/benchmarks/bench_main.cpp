#include <benchmark/benchmark.h>

#include "spinpath/exact.hpp"
#include "spinpath/exploration.hpp"
#include "spinpath/mcmc.hpp"

using namespace spinpath;

namespace {

ModelParams desk_params() {
  ModelParams p;
  p.n_colours = 2;
  p.beta = 0.5;
  p.h = 0.8;
  p.cap_orig = 3;
  p.cap_ghost = 4;
  return p;
}

void bm_site_weight(benchmark::State& state) {
  double acc = 0.0;
  for (auto _ : state) {
    for (int r = 0; r < 32; ++r) acc += site_weight_log(r, 3);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(bm_site_weight);

void bm_sphere_moment(benchmark::State& state) {
  std::vector<int> e{2, 1, 3};
  double acc = 0.0;
  for (auto _ : state) {
    acc += sphere_moment_log(e);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(bm_sphere_moment);

void bm_enumerate_p3(benchmark::State& state) {
  ExtendedGraph g(make_path(3));
  EnumerationSpec spec{&g, desk_params()};
  for (auto _ : state) {
    auto res = enumerate_partition(spec, ClassSpec::loops_only());
    benchmark::DoNotOptimize(res.log_z);
  }
}
BENCHMARK(bm_enumerate_p3);

void bm_expected_mxy_p3(benchmark::State& state) {
  ExtendedGraph g(make_path(3));
  EnumerationSpec spec{&g, desk_params(), EnumMode::ExplicitPairings};
  for (auto _ : state) {
    double m = expected_mxy(spec, 0, 2);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(bm_expected_mxy_p3);

void bm_mcmc_step(benchmark::State& state) {
  ExtendedGraph g(make_path(3));
  WormChain chain(g, desk_params(), 1);
  for (auto _ : state) {
    chain.step();
    benchmark::DoNotOptimize(chain.log_weight());
  }
}
BENCHMARK(bm_mcmc_step);

void bm_exploration_trace(benchmark::State& state) {
  ExtendedGraph g(make_path(3));
  EdgeData cond = EdgeData::empty(g);
  cond.m[0] = 1;
  cond.colours[0] = {2};
  cond.m[1] = 1;
  cond.colours[1] = {2};
  ModelParams p = desk_params();
  Rng root(5);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng child = root.split(i++);
    auto trace = run_sampling_procedure(g, p, cond, 0, 2, child);
    benchmark::DoNotOptimize(trace.steps.size());
  }
}
BENCHMARK(bm_exploration_trace);

}  // namespace

BENCHMARK_MAIN();
