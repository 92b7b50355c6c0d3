#include "agesis/demography.hpp"
#include "agesis/simulator.hpp"
#include "agesis/threshold.hpp"

#include <benchmark/benchmark.h>

using namespace agesis;

namespace {

KernelSet reference_kernels(double q)
{
    return KernelSet(AgeKernel::parabolic(200.0, 15000.0), AgeKernel::rational_decay(q), 0.06,
                     200.0, 0.2);
}

SimulationConfig reference_config(double q)
{
    SimulationConfig cfg{DegreeDistribution::power_law(2.4, 40), InfectivityFunction::linear(),
                         reference_kernels(q)};
    cfg.b = 0.07;
    cfg.mu = 0.06;
    cfg.dt = 0.1;
    cfg.t_end = 10.0;
    return cfg;
}

void bm_kernel_set_build(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(reference_kernels(10.0));
}
BENCHMARK(bm_kernel_set_build);

void bm_k1_transform(benchmark::State& state)
{
    const KernelSet ks = reference_kernels(10.0);
    double lambda = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ks.k1(lambda));
        lambda += 1e-6;
    }
}
BENCHMARK(bm_k1_transform);

void bm_solve_demography(benchmark::State& state)
{
    const auto dist = DegreeDistribution::power_law(2.4, 40);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_demography(dist, 0.07, 0.06));
}
BENCHMARK(bm_solve_demography);

void bm_endemic_equilibrium(benchmark::State& state)
{
    const auto dist = DegreeDistribution::power_law(2.4, 40);
    const auto phi = InfectivityFunction::linear();
    const KernelSet ks = reference_kernels(10.0);
    const auto dem = solve_demography(dist, 0.07, 0.06);
    for (auto _ : state)
        benchmark::DoNotOptimize(endemic_equilibrium(dist, phi, ks, dem));
}
BENCHMARK(bm_endemic_equilibrium);

void bm_simulator_step(benchmark::State& state)
{
    SimulationConfig cfg = reference_config(10.0);
    EpidemicState st = initialize(cfg);
    for (auto _ : state) {
        step(st, cfg);
        benchmark::DoNotOptimize(st.S[0]);
    }
}
BENCHMARK(bm_simulator_step);

void bm_run_short(benchmark::State& state)
{
    const SimulationConfig cfg = reference_config(10.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(run(cfg));
}
BENCHMARK(bm_run_short)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
