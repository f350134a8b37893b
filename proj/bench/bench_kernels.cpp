#include "lab/agmon.hpp"
#include "lab/carleman.hpp"
#include "lab/constants.hpp"
#include "lab/diskmodes.hpp"
#include "lab/modes1d.hpp"

#include <benchmark/benchmark.h>

using namespace lab;

namespace {

const SpectralBasis& sphere_basis()
{
    static const SpectralBasis b = revolution_basis(make_profile("sphere"), 30, 1000, 1500);
    return b;
}

void BM_gram(benchmark::State& st)
{
    const SpectralBasis& b = sphere_basis();
    Region om = Region::interval(0.0, 0.6);
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? gram(b, om) : gram_serial(b, om));
}

void BM_solve_family(benchmark::State& st)
{
    RevolutionProfile p = make_profile("sphere");
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? solve_family(p, 1, 24, 0, 4000)
                                             : solve_family_serial(p, 1, 24, 0, 4000));
}

void BM_agmon_table(benchmark::State& st)
{
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? agmon_table(p, eq, 400)
                                             : agmon_table_serial(p, eq, 400));
}

void BM_whispering_modes(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? whispering_modes(5, 120)
                                             : whispering_modes_serial(5, 120));
}

void BM_subellipticity(benchmark::State& st)
{
    Grid g(2, 129);
    MetricField m = MetricField::flat(g);
    Field Psi = sample(g, [](const Eigen::Vector2d& x) { return -(x - Eigen::Vector2d(-0.5, 0.5)).norm(); });
    WeightPair w = convexify(Psi, m, 4.0);
    for (auto _ : st)
        benchmark::DoNotOptimize(st.range(0) ? subellipticity_minima(w, m, 8)
                                             : subellipticity_minima_serial(w, m, 8));
}

} // namespace

// Arg(0) is the serial reference, Arg(1) the OpenMP kernel.
BENCHMARK(BM_gram)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_family)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_agmon_table)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_whispering_modes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_subellipticity)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
