#include <benchmark/benchmark.h>

#include <omp.h>

#include "isp/forward.hpp"

namespace {

// Every admissible entry filled with one decaying exponential.
isp::MCanonicalPotential full_potential(int n) {
    isp::MCanonicalPotential p(n);
    for (isp::Block b : isp::kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                if (isp::potential_entry_allowed(b, n, k, j))
                    p.set_entry(b, k, j,
                                isp::ScalarProfile::exp_sum({{isp::cplx(0.2 / n, 0.05 * (k - j)), 1.0 + 0.1 * (k + j)}}));
    return p;
}

isp::Dispersion speeds(int n) {
    std::vector<double> xi;
    for (int k = n; k >= 1; --k) xi.push_back(-double(k));
    for (int k = 1; k <= n; ++k) xi.push_back(double(k));
    return isp::Dispersion(xi);
}

void run(benchmark::State& state, isp::Exec exec) {
    const int n = int(state.range(0));
    const auto pot = full_potential(n);
    const auto disp = speeds(n);
    isp::KernelOptions o;
    o.step = 0.02;
    o.exec = exec;
    for (auto _ : state) {
        auto k = isp::solve_to_kernels(pot, disp, o);
        benchmark::DoNotOptimize(k.c_tilde());
    }
    state.counters["threads"] = exec == isp::Exec::Parallel ? omp_get_max_threads() : 1;
}

void BM_KernelsSerial(benchmark::State& s) { run(s, isp::Exec::Serial); }
void BM_KernelsParallel(benchmark::State& s) { run(s, isp::Exec::Parallel); }

}  // namespace

BENCHMARK(BM_KernelsSerial)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelsParallel)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
