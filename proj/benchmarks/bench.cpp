// Microbenchmarks for the numeric hot paths: incomplete gamma orders the
// transforms actually hit, both transform evaluation routes, the kernel
// optimizer cold and warm, and raw simulator throughput.

#include <ifperf/bounds.hpp>
#include <ifperf/channel.hpp>
#include <ifperf/gamma.hpp>
#include <ifperf/mellin.hpp>
#include <ifperf/simulator.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace ifperf;

ChannelSpec bench_spec()
{
    ChannelSpec spec;
    spec.avg_snr = db_to_linear(15.0);
    spec.interferer_ratios = {2.2, 3.7, 9.1};
    spec.symbols_per_slot = 1.0;
    return spec;
}

void BM_ScaledUpperGamma(benchmark::State& state)
{
    // negative orders dominate the transform inner loops
    double a = -0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scaled_upper_incomplete_gamma(a, 0.0316));
        a = a <= -40.0 ? -0.3 : a - 1.0;
    }
}
BENCHMARK(BM_ScaledUpperGamma);

void BM_ServiceMellinSeries(benchmark::State& state)
{
    const ChannelSpec spec = bench_spec();
    for (auto _ : state)
        benchmark::DoNotOptimize(mellin_service(spec, 0.7));
}
BENCHMARK(BM_ServiceMellinSeries);

void BM_ServiceMellinQuadrature(benchmark::State& state)
{
    const ChannelSpec spec = bench_spec();
    for (auto _ : state)
        benchmark::DoNotOptimize(mellin_service_quadrature(spec, 0.7));
}
BENCHMARK(BM_ServiceMellinQuadrature);

void BM_KernelOptimizeCold(benchmark::State& state)
{
    const ChannelSpec spec = bench_spec();
    for (auto _ : state) {
        KernelEvaluator ev(spec);  // fresh transform cache every iteration
        benchmark::DoNotOptimize(ev.violation_probability(0.85, 10));
    }
}
BENCHMARK(BM_KernelOptimizeCold);

void BM_DelayBoundWarm(benchmark::State& state)
{
    const ChannelSpec spec = bench_spec();
    KernelEvaluator ev(spec);
    ev.violation_probability(0.85, 10);  // populate the cache up front
    for (auto _ : state)
        benchmark::DoNotOptimize(ev.delay_bound(0.85, 1e-6));
}
BENCHMARK(BM_DelayBoundWarm);

void BM_SinrSampling(benchmark::State& state)
{
    SinrSampler sampler(bench_spec(), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(sampler.next());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SinrSampling);

void BM_QueueSimulation(benchmark::State& state)
{
    SimConfig cfg;
    cfg.spec = bench_spec();
    cfg.arrivals = {0.85};
    cfg.slots = 100000;
    cfg.seed = 7;
    cfg.delay_grid = {1, 2, 5, 10, 20};
    for (auto _ : state)
        benchmark::DoNotOptimize(run_queue(cfg));
    state.SetItemsProcessed(state.iterations() * cfg.slots);
}
BENCHMARK(BM_QueueSimulation);

}  // namespace

BENCHMARK_MAIN();
