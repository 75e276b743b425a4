// Microbenchmarks for the hot paths: the analytic recourse solve, the conic
// interior-point method on an assembled planning model, and the full solve
// pipelines on a small network.
#include <benchmark/benchmark.h>

#include <random>

#include "fixtures.hpp"
#include "windplan/evaluate.hpp"

using namespace windplan;
using namespace windplan::testing;
using Eigen::VectorXd;

static void BM_RecourseMeritOrder(benchmark::State& state) {
    const int g = static_cast<int>(state.range(0));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    VectorXd r_up(g), r_dn(g), ua(g), da(g);
    for (int i = 0; i < g; ++i) {
        r_up(i) = 5 * unif(rng);
        r_dn(i) = 5 * unif(rng);
        ua(i) = 100 * unif(rng);
        da(i) = 40 * unif(rng);
    }
    double e = 3.7;
    for (auto _ : state) {
        auto sol = solve_recourse(e, r_up, r_dn, ua, da, 60.0, 200.0);
        benchmark::DoNotOptimize(sol.value);
        e = -e;
    }
}
BENCHMARK(BM_RecourseMeritOrder)->Arg(3)->Arg(10)->Arg(30);

static void BM_ConicSolveExtensive(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    PlanningInstance inst = single_generator_instance(3);
    SampleTensor train = weibull_block(3, n, 11);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.3;
    AssembledModel model = assemble_extensive(inst, train, forecast, spec, {});
    for (auto _ : state) {
        auto sol = conic::solve_conic(model.program);
        benchmark::DoNotOptimize(sol.objective);
    }
}
BENCHMARK(BM_ConicSolveExtensive)->Arg(10)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_PlanPipeline(benchmark::State& state) {
    PlanningInstance inst = single_generator_instance(2);
    SampleTensor train = weibull_block(2, 15, 13);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.2;
    const Algo algo = static_cast<Algo>(state.range(0));
    for (auto _ : state) {
        auto sol = solve(inst, train, forecast, spec, algo);
        benchmark::DoNotOptimize(sol.objective);
    }
}
BENCHMARK(BM_PlanPipeline)
    ->Arg(static_cast<int>(Algo::extensive))
    ->Arg(static_cast<int>(Algo::cg))
    ->Arg(static_cast<int>(Algo::cg_l))
    ->Unit(benchmark::kMillisecond);

static void BM_LineScreening(benchmark::State& state) {
    PlanningInstance inst = ieee14_instance(3, 0.6);
    SampleTensor train = weibull_block(3, 12, 17);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.25;
    PlanSolution sol = solve(inst, train, forecast, spec, Algo::cg);
    MomentTable moments = compute_moments(train);
    for (auto _ : state) {
        auto violated = line_flow_check(inst, sol.x, sol.schedule, train, moments, spec);
        benchmark::DoNotOptimize(violated.size());
    }
}
BENCHMARK(BM_LineScreening)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
