// Microbenchmarks for the hot paths: per-sample statistics, ECDF lookups,
// ranking metrics, and flow transport.

#include <benchmark/benchmark.h>

#include <sitn/calibration.hpp>
#include <sitn/ecdf.hpp>
#include <sitn/eval.hpp>
#include <sitn/flow.hpp>
#include <sitn/gof.hpp>
#include <sitn/rng.hpp>

#include <vector>

namespace {

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
    sitn::Rng rng(seed);
    std::vector<double> v(n);
    rng.fill_normal(v);
    return v;
}

void bm_anderson_darling_3072(benchmark::State& state) {
    const auto z = normal_draws(3072, 1);
    for (auto _ : state) benchmark::DoNotOptimize(sitn::gof::anderson_darling(z));
}
BENCHMARK(bm_anderson_darling_3072);

void bm_spectral_cv_3072(benchmark::State& state) {
    const auto z = normal_draws(3072, 2);
    for (auto _ : state) benchmark::DoNotOptimize(sitn::gof::spectral_cv(z));
}
BENCHMARK(bm_spectral_cv_3072);

void bm_kolmogorov_smirnov_3072(benchmark::State& state) {
    const auto z = normal_draws(3072, 3);
    for (auto _ : state) benchmark::DoNotOptimize(sitn::gof::kolmogorov_smirnov(z));
}
BENCHMARK(bm_kolmogorov_smirnov_3072);

void bm_ecdf_quantile(benchmark::State& state) {
    const auto v = normal_draws(10000, 4);
    const sitn::Ecdf ecdf = sitn::Ecdf::fit(v);
    double p = 0.0;
    for (auto _ : state) {
        p += 1e-4;
        if (p >= 1.0) p = 1e-4;
        benchmark::DoNotOptimize(ecdf.quantile(p));
    }
}
BENCHMARK(bm_ecdf_quantile);

void bm_auroc_20k(benchmark::State& state) {
    sitn::Rng rng(5);
    std::vector<double> scores(20000);
    std::vector<int> labels(20000);
    rng.fill_normal(scores);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = i % 2 ? 1 : 0;
        if (labels[i] == 1) scores[i] += 0.5;
    }
    for (auto _ : state) benchmark::DoNotOptimize(sitn::auroc(scores, labels));
}
BENCHMARK(bm_auroc_20k);

void bm_velocity_batch_d32(benchmark::State& state) {
    const sitn::FlowModel model = sitn::FlowModel::init(32, 7);
    const auto x = normal_draws(256 * 32, 8);
    std::vector<double> out(x.size());
    for (auto _ : state) {
        model.velocity_batch(x, 0.5, 256, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_velocity_batch_d32);

void bm_transport_batch_d32(benchmark::State& state) {
    const sitn::FlowModel model = sitn::FlowModel::init(32, 9);
    const auto x0 = normal_draws(64 * 32, 10);
    const sitn::SolverConfig config;
    for (auto _ : state) {
        std::vector<double> x = x0;
        sitn::transport_batch(model, x, 64, /*forward=*/true, config);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(bm_transport_batch_d32);

}  // namespace

BENCHMARK_MAIN();
