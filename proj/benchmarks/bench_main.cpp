#include <benchmark/benchmark.h>

#include <memory>

#include "ibo/acquisition.hpp"
#include "ibo/grid.hpp"
#include "ibo/inference.hpp"
#include "ibo/likelihood.hpp"
#include "ibo/rng.hpp"
#include "ibo/simulation.hpp"

using namespace ibo;

namespace {

const AcquisitionModel& model() {
    static const AcquisitionModel m;
    return m;
}

std::shared_ptr<const CandidateGrid> grid_u() {
    static const auto g = std::make_shared<const CandidateGrid>(precompute_grid(GridConfig{}));
    return g;
}

ObservationSet observations(int n) {
    SimConfig cfg;
    cfg.truth = {Family::ei, 15.0};
    cfg.n_obs = n;
    cfg.seed = 9;
    return generate_observations(cfg, model());
}

}  // namespace

static void BM_WrappedCauchyPdf(benchmark::State& state) {
    Rng rng(1);
    double theta = rng.angle();
    for (auto _ : state) {
        benchmark::DoNotOptimize(wrapped_cauchy_pdf(theta, {0.3, 0.25}));
        theta += 1e-3;
    }
}
BENCHMARK(BM_WrappedCauchyPdf);

static void BM_Argmax(benchmark::State& state) {
    const AcquisitionSpec spec{static_cast<Family>(state.range(0)), state.range(0) == 2 ? 0.95 : 15.0};
    double dr = -34.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model().argmax(spec, dr));
        dr = dr > 34.0 ? -34.0 : dr + 0.7;
    }
}
BENCHMARK(BM_Argmax)->Arg(0)->Arg(1)->Arg(2);

static void BM_Curve(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(model().curve({Family::ucb, 0.9}));
}
BENCHMARK(BM_Curve)->Unit(benchmark::kMillisecond);

static void BM_PrecomputeGrid(benchmark::State& state) {
    GridConfig cfg;
    if (state.range(0) == 1) {
        cfg.augmentation = Augmentation::split;
        cfg.coarse_tau = true;
    }
    for (auto _ : state) benchmark::DoNotOptimize(precompute_grid(cfg));
}
BENCHMARK(BM_PrecomputeGrid)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);

static void BM_EmWeight(benchmark::State& state) {
    const auto obs = observations(static_cast<int>(state.range(0)));
    const auto curve = model().curve({Family::ei, 15.0});
    for (auto _ : state) benchmark::DoNotOptimize(fit_weight_em(obs, curve, 0.25));
}
BENCHMARK(BM_EmWeight)->Arg(100)->Arg(1000);

static void BM_Posterior(benchmark::State& state) {
    const auto obs = observations(static_cast<int>(state.range(0)));
    const auto grid = grid_u();
    for (auto _ : state) benchmark::DoNotOptimize(posterior(obs, grid));
}
BENCHMARK(BM_Posterior)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
