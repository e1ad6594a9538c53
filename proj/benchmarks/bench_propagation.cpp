#include <benchmark/benchmark.h>

#include "fvddp/death_process.hpp"
#include "fvddp/lattice.hpp"

using namespace fvddp;

namespace {

WeightedNodeSet spread_nodes(int dim, int per) {
  std::vector<int> top(static_cast<std::size_t>(dim), per);
  WeightedNodeSet s(static_cast<std::size_t>(dim));
  for (const auto& n : enumerate_below(MultiplicityVector(top))) s.add(n, 1.0 + n.total());
  s.normalize();
  return s;
}

}  // namespace

static void BM_LevelRow(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(level_transition_row(m, 0.3, 1.0));
}
BENCHMARK(BM_LevelRow)->Arg(10)->Arg(50)->Arg(200);

static void BM_PropagateExact(benchmark::State& state) {
  const auto nodes = spread_nodes(static_cast<int>(state.range(0)), 3);
  PropagationOptions opts;
  opts.mode = PropagationOptions::Mode::Exact;
  opts.exact_budget = 1'000'000'000;
  TransitionCache cache;
  for (auto _ : state) benchmark::DoNotOptimize(propagate_weights_exact(nodes, 0.5, 1.0, opts, cache));
  state.counters["nodes"] = static_cast<double>(nodes.size());
}
BENCHMARK(BM_PropagateExact)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_PropagateMonteCarlo(benchmark::State& state) {
  const auto nodes = spread_nodes(static_cast<int>(state.range(0)), 3);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_weights_mc(nodes, 0.5, 1.0, 10'000, rng));
}
BENCHMARK(BM_PropagateMonteCarlo)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
