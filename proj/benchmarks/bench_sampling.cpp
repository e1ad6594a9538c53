#include <benchmark/benchmark.h>

#include "fvddp/filter.hpp"
#include "fvddp/partition.hpp"
#include "fvddp/predictive.hpp"

using namespace fvddp;

namespace {

PredictiveState two_time_state() {
  const std::vector<Value> batch{1, 2, 2, 4, 7};
  FilterState s = init(make_base(1.0, parse_distribution("poisson:3")), 1.0);
  s = update_batch(s, batch);
  s = advance_time(s, 1.0);
  s = update_batch(s, batch);
  return exact_predict(s, 0.5);
}

}  // namespace

static void BM_SampleSequence(benchmark::State& state) {
  const auto s = two_time_state();
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_sequence(s, static_cast<int>(state.range(0)), rng));
}
BENCHMARK(BM_SampleSequence)->Arg(10)->Arg(100)->Arg(1000);

static void BM_SamplePartition(benchmark::State& state) {
  const auto s = two_time_state();
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_partition(s, static_cast<int>(state.range(0)), rng));
}
BENCHMARK(BM_SamplePartition)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
