// Generation throughput: cached circulant synthesis vs paying the embedding
// on every draw vs the dense factorization, plus the one-off setup costs.

#include "longmem/fgn.hpp"
#include "longmem/processes.hpp"

#include <benchmark/benchmark.h>

#include <cstddef>

namespace {

void BM_circulant_cached(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::clear_fgn_caches();
    longmem::FgnSampler sampler(longmem::RngStream(1));
    benchmark::DoNotOptimize(sampler.next(n, 0.7).values.data());  // prime the spectrum
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.next(n, 0.7).values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_circulant_cached)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_circulant_online(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::RngStream rng(2);
    for (auto _ : state) {
        longmem::clear_fgn_caches();  // force the eigenvalue pass every draw
        benchmark::DoNotOptimize(longmem::sample_fgn_pair(n, 0.7, rng).first.values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_circulant_online)->Arg(1 << 10)->Arg(1 << 14);

void BM_cholesky_draw(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::clear_fgn_caches();
    longmem::RngStream rng(3);
    benchmark::DoNotOptimize(longmem::sample_fgn_cholesky(n, 0.7, rng).values.data());
    for (auto _ : state) {  // factor is cached; this times the triangular multiply
        benchmark::DoNotOptimize(longmem::sample_fgn_cholesky(n, 0.7, rng).values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_cholesky_draw)->Arg(1 << 9)->Arg(1 << 11);

void BM_cholesky_factorize(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::RngStream rng(4);
    for (auto _ : state) {
        longmem::clear_fgn_caches();
        benchmark::DoNotOptimize(longmem::sample_fgn_cholesky(n, 0.7, rng).values.data());
    }
}
BENCHMARK(BM_cholesky_factorize)->Arg(1 << 9)->Arg(1 << 11)->Unit(benchmark::kMillisecond);

void BM_arfima(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::RngStream rng(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(longmem::sample_arfima(n, 0.3, rng).values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_arfima)->Arg(1 << 10)->Arg(1 << 14);

void BM_fou(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    longmem::FouParams p;
    p.hurst = 0.7;
    p.alpha = 1.0;
    p.dt = 0.01;
    longmem::RngStream rng(6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(longmem::sample_fou(p, n, rng).values.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}
BENCHMARK(BM_fou)->Arg(1 << 10)->Arg(1 << 14);

}  // namespace

BENCHMARK_MAIN();
