#include <benchmark/benchmark.h>

#include "pairiv/estimators.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/simulate.hpp"
#include "support/test_util.hpp"

using namespace pairiv;

namespace {

DgpSpec bench_spec(int groups) {
    return pairiv::testing::random_spec(4711, pairiv::testing::SpecKind::Osn, groups);
}

void BM_Simulate(benchmark::State& state) {
    const DgpSpec spec = bench_spec(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(spec, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ComputeMoments(benchmark::State& state) {
    const Dataset ds = simulate(bench_spec(static_cast<int>(state.range(0))), 1);
    const MomentLayout layout{HBlock::Full8, {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_moments(ds, layout));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMoments)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_EstimateAll(benchmark::State& state) {
    const Dataset ds = simulate(bench_spec(static_cast<int>(state.range(0))), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_all(ds));
    }
}
BENCHMARK(BM_EstimateAll)->Arg(1000)->Arg(10000);

void BM_TslsSpillover(benchmark::State& state) {
    const Dataset ds = simulate(bench_spec(static_cast<int>(state.range(0))), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsls_spillover(ds));
    }
}
BENCHMARK(BM_TslsSpillover)->Arg(1000)->Arg(10000);

void BM_VerifyIdentities(benchmark::State& state) {
    const DgpSpec spec = bench_spec(10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify_identities(spec));
    }
}
BENCHMARK(BM_VerifyIdentities);

void BM_Truth(benchmark::State& state) {
    const DgpSpec spec = bench_spec(10);
    for (auto _ : state) {
        benchmark::DoNotOptimize(truth(spec));
    }
}
BENCHMARK(BM_Truth);

}  // namespace

BENCHMARK_MAIN();
