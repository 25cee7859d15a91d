// Estimation throughput on a fixed fGn draw: the classical methods and a
// forward pass of the randomly initialized network.

#include "longmem/estimators.hpp"
#include "longmem/fgn.hpp"
#include "longmem/nn.hpp"
#include "longmem/path.hpp"

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

namespace {

std::vector<double> fixture_increments(std::size_t n) {
    longmem::FgnSampler sampler(longmem::RngStream(7));
    return sampler.next(n, 0.7).values;
}

void BM_rs(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(longmem::rs_estimate(x).value);
}
BENCHMARK(BM_rs)->Arg(1 << 9)->Arg(1 << 12);

void BM_variogram(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(longmem::variogram_estimate(x).value);
}
BENCHMARK(BM_variogram)->Arg(1 << 9)->Arg(1 << 12);

void BM_higuchi(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    const auto path = longmem::cumsum_from_zero(x);
    for (auto _ : state) benchmark::DoNotOptimize(longmem::higuchi_estimate(path).value);
}
BENCHMARK(BM_higuchi)->Arg(1 << 9)->Arg(1 << 12);

void BM_qgv(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    const auto path = longmem::cumsum_from_zero(x);
    for (auto _ : state) benchmark::DoNotOptimize(longmem::qgv_estimate(path).value);
}
BENCHMARK(BM_qgv)->Arg(1 << 9)->Arg(1 << 12);

void BM_whittle_fgn(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    longmem::clear_estimator_caches();
    benchmark::DoNotOptimize(  // prime the density tables for this length
        longmem::whittle_estimate(x, longmem::WhittleFamily::fgn).value);
    for (auto _ : state) {
        benchmark::DoNotOptimize(longmem::whittle_estimate(x, longmem::WhittleFamily::fgn).value);
    }
}
BENCHMARK(BM_whittle_fgn)->Arg(1 << 9)->Arg(1 << 12)->Unit(benchmark::kMillisecond);

void BM_whittle_tables(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        longmem::clear_estimator_caches();
        benchmark::DoNotOptimize(longmem::whittle_estimate(x, longmem::WhittleFamily::fgn).value);
    }
}
BENCHMARK(BM_whittle_tables)->Arg(1 << 9)->Arg(1 << 12)->Unit(benchmark::kMillisecond);

void BM_cnn_infer(benchmark::State& state) {
    const auto x = fixture_increments(static_cast<std::size_t>(state.range(0)));
    const longmem::nn::Model model(longmem::nn::Topology{}, 1);
    for (auto _ : state) benchmark::DoNotOptimize(model.infer_one(x));
}
BENCHMARK(BM_cnn_infer)->Arg(100)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_cnn_gradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const longmem::nn::Model model(longmem::nn::Topology{}, 1);
    longmem::nn::Batch batch;
    batch.count = 8;
    batch.len = n;
    batch.x.resize(batch.count * n);
    longmem::RngStream rng(8);
    for (double& v : batch.x) v = rng.normal();
    const auto prepared = model.preprocess(batch);
    const std::vector<double> targets(batch.count, 0.5);
    std::vector<double> grad(model.parameter_count());
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.loss_and_gradient(prepared, targets, grad));
    }
}
BENCHMARK(BM_cnn_gradient)->Arg(100)->Arg(800)->Unit(benchmark::kMillisecond);

}  // namespace
