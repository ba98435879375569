#include <benchmark/benchmark.h>

#include <vector>

#include "apf/filter.hpp"
#include "apf/grid_filter.hpp"
#include "apf/models.hpp"
#include "apf/resampling.hpp"

namespace {

const std::function<double(double)> kIdentity = [](double x) { return x; };

apf::WeightedSample make_sample(int n) {
    apf::RngStream rng(1, 0);
    std::vector<double> states(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        states[static_cast<std::size_t>(i)] = rng.normal();
        weights[static_cast<std::size_t>(i)] = rng.uniform() + 1e-3;
    }
    return apf::WeightedSample::from_linear(std::move(states), std::move(weights));
}

void BM_ResampleMultinomial(benchmark::State& state) {
    auto sample = make_sample(static_cast<int>(state.range(0)));
    apf::RngStream rng(2, 1);
    for (auto _ : state) {
        auto idx = apf::resample_multinomial(sample, static_cast<int>(state.range(0)), rng);
        benchmark::DoNotOptimize(idx.data());
    }
}
BENCHMARK(BM_ResampleMultinomial)->Arg(1000)->Arg(10000);

void BM_ResampleSystematic(benchmark::State& state) {
    auto sample = make_sample(static_cast<int>(state.range(0)));
    apf::RngStream rng(2, 2);
    for (auto _ : state) {
        auto idx = apf::resample_systematic(sample, static_cast<int>(state.range(0)), rng);
        benchmark::DoNotOptimize(idx.data());
    }
}
BENCHMARK(BM_ResampleSystematic)->Arg(1000)->Arg(10000);

void BM_ResampleResidual(benchmark::State& state) {
    auto sample = make_sample(static_cast<int>(state.range(0)));
    apf::RngStream rng(2, 3);
    for (auto _ : state) {
        auto idx = apf::resample_residual(sample, static_cast<int>(state.range(0)), rng);
        benchmark::DoNotOptimize(idx.data());
    }
}
BENCHMARK(BM_ResampleResidual)->Arg(1000)->Arg(10000);

void BM_BootstrapFilter(benchmark::State& state) {
    apf::LinearGaussianAR1 model(0.9, 0.1, 0.1);
    apf::RngStream record_rng(3, 0);
    auto record = apf::simulate(model, 10, record_rng).observations;
    apf::FilterConfig config;
    config.variant = apf::FilterVariant::Bootstrap;
    config.particles = static_cast<int>(state.range(0));
    std::uint64_t rep = 0;
    for (auto _ : state) {
        apf::RngStream rng(4, rep++);
        auto result = apf::run_filter(config, model, record, kIdentity, rng);
        benchmark::DoNotOptimize(result.estimates.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 11);
}
BENCHMARK(BM_BootstrapFilter)->Arg(1000)->Arg(10000);

void BM_OptimalWeightSsapf(benchmark::State& state) {
    apf::LinearGaussianAR1 model(0.9, 0.1, 0.1);
    apf::RngStream record_rng(3, 0);
    auto record = apf::simulate(model, 10, record_rng).observations;
    std::vector<double> means(record.size(), 0.0);
    apf::FilterConfig config;
    config.particles = static_cast<int>(state.range(0));
    config.strategy = apf::FirstStageKind::OptimalExact;
    std::uint64_t rep = 0;
    for (auto _ : state) {
        apf::RngStream rng(5, rep++);
        auto result = apf::run_filter(config, model, record, kIdentity, rng, &means);
        benchmark::DoNotOptimize(result.estimates.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 11);
}
BENCHMARK(BM_OptimalWeightSsapf)->Arg(1000)->Arg(4000);

void BM_GridFilter(benchmark::State& state) {
    apf::LinearGaussianAR1 model(0.9, 0.1, 0.1);
    apf::RngStream record_rng(3, 0);
    auto record = apf::simulate(model, 10, record_rng).observations;
    for (auto _ : state) {
        auto result = apf::grid_filter_auto(model, record, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(result.means.data());
    }
}
BENCHMARK(BM_GridFilter)->Arg(1024)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
