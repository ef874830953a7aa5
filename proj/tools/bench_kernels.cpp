// Serial vs parallel throughput of the numeric kernels.  The parallel paths
// are chunk-deterministic, so both variants of each benchmark compute the
// same value bit for bit; the interesting number is the speedup.

#include <benchmark/benchmark.h>

#include <cmath>

#include "calor/exec.hpp"
#include "calor/frequency.hpp"
#include "calor/gaussquad.hpp"

namespace {

using namespace calor;

void bm_reduce(benchmark::State& state, Exec exec) {
    const std::size_t count = (std::size_t)state.range(0);
    for (auto _ : state) {
        double v = reduce_indexed(
            count,
            [](std::size_t i) {
                double x = 1e-6 * (double)i;
                return std::sin(x) / (1.0 + x * x);
            },
            exec);
        benchmark::DoNotOptimize(v);
    }
}

void bm_integrate(benchmark::State& state, Exec exec) {
    HeatKernelMeasure mu{SpaceTimePoint(Eigen::VectorXd::Zero(3), 0.0), -1.0};
    auto f = [](const Eigen::VectorXd& x, double) {
        return std::exp(-0.3 * x(0) * x(0)) * std::cos(x(1)) + std::tanh(x(2));
    };
    const int order = (int)state.range(0);
    for (auto _ : state) {
        auto r = integrate_fn(f, mu, order, exec, 0.0, order);
        benchmark::DoNotOptimize(r.value);
    }
}

void bm_profile(benchmark::State& state, Exec exec) {
    // rational frequency profile of 1 + h_2 (the quadrature inside is exact;
    // exec switches the smear/assembly reductions)
    set_threads(exec == Exec::Serial ? 1 : 0);
    Poly u = Poly::constant(1, Rat(1)) + heat_polynomial(2, 0, 1);
    SpaceTimePoint base(Eigen::VectorXd::Zero(1), 0.0);
    for (auto _ : state) {
        auto prof = profile(u, base, 1.0 / 64, 4.0);
        benchmark::DoNotOptimize(prof.N.data());
    }
    set_threads(0);
}

} // namespace

BENCHMARK_CAPTURE(bm_reduce, serial, Exec::Serial)->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK_CAPTURE(bm_reduce, parallel, Exec::Parallel)->Arg(1 << 20)->Arg(1 << 24);
BENCHMARK_CAPTURE(bm_integrate, serial, Exec::Serial)->Arg(32)->Arg(64);
BENCHMARK_CAPTURE(bm_integrate, parallel, Exec::Parallel)->Arg(32)->Arg(64);
BENCHMARK_CAPTURE(bm_profile, serial, Exec::Serial);
BENCHMARK_CAPTURE(bm_profile, parallel, Exec::Parallel);

BENCHMARK_MAIN();
