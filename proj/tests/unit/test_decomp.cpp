#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "windplan/decomp.hpp"

using namespace windplan;
using namespace windplan::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("optimality cut is tight at the generating point") {
    PlanningInstance inst = single_generator_instance(2);
    SampleTensor train = weibull_block(2, 8, 23);
    ForecastTable forecast = forecast_from_samples(train);
    VectorXd x(2);
    x << 3, 5;
    VectorXd r_up = VectorXd::Constant(1, 1.2);
    VectorXd r_dn = VectorXd::Constant(1, 0.7);
    VectorXd ua = VectorXd::Constant(1, inst.generators[0].up_adjust_cost);
    VectorXd da = VectorXd::Constant(1, inst.generators[0].down_adjust_cost);
    auto rec = empirical_recourse_expectation(x, train, forecast, 0, 0, r_up, r_dn, ua, da,
                                              inst.costs.wind_curtail_cost,
                                              inst.costs.load_shed_cost);
    Cut cut = build_cut(inst, train, forecast, 0, 0, rec, 0);
    double value = cut.coeff_x.dot(x) + cut.coeff_up.dot(r_up) + cut.coeff_dn.dot(r_dn) +
                   cut.constant;
    CHECK(value == doctest::Approx(rec.mean).epsilon(1e-7).scale(1.0 + rec.mean));
}

TEST_CASE("solver pipelines agree on a line free instance") {
    PlanningInstance inst = single_generator_instance(2);
    SampleTensor train = weibull_block(2, 10, 29);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.4;

    SolveLog log_ext, log_ls;
    PlanSolution ext = solve(inst, train, forecast, spec, Algo::extensive, {}, &log_ext);
    PlanSolution cg = solve(inst, train, forecast, spec, Algo::cg);
    PlanSolution cgl = solve(inst, train, forecast, spec, Algo::cg_l, {}, &log_ls);

    CHECK(ext.objective ==
          doctest::Approx(cg.objective).epsilon(1e-5).scale(1.0 + std::abs(ext.objective)));
    CHECK(ext.objective ==
          doctest::Approx(cgl.objective).epsilon(1e-5).scale(1.0 + std::abs(ext.objective)));
    CHECK((ext.x - cg.x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((ext.x - cgl.x).cwiseAbs().maxCoeff() < 1e-6);

    // Bound bookkeeping of the decomposition log.
    double prev_lb = -std::numeric_limits<double>::infinity();
    for (const auto& entry : log_ls.entries) {
        CHECK(entry.lb >= prev_lb - 1e-7 * (1.0 + std::abs(entry.lb)));
        prev_lb = entry.lb;
        CHECK(entry.ub >= entry.lb - 1e-6 * (1.0 + std::abs(entry.lb)));
    }
}

TEST_CASE("objective equals its decomposition") {
    PlanningInstance inst = single_generator_instance(3);
    SampleTensor train = weibull_block(3, 8, 31);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::full_covariance;
    spec.kappa = 0.6;
    PlanSolution sol = solve(inst, train, forecast, spec, Algo::extensive);
    double total = sol.investment + sol.generation + sol.reserve + sol.regularizer +
                   sol.recourse_mean;
    CHECK(sol.objective == doctest::Approx(total).epsilon(1e-9));
    // Re-evaluating the same decision reproduces the decomposition.
    PlanSolution re = evaluate_plan(inst, train, forecast, spec, sol.x, sol.schedule);
    CHECK(re.objective ==
          doctest::Approx(sol.objective).epsilon(1e-7).scale(1.0 + std::abs(sol.objective)));
}

TEST_CASE("capacity pin fixes the total build") {
    PlanningInstance inst = single_generator_instance(2);
    SampleTensor train = weibull_block(2, 8, 37);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.2;
    SolveOptions opts;
    opts.fixed_total_capacity = 6.0;
    PlanSolution sol = solve(inst, train, forecast, spec, Algo::extensive, opts);
    CHECK(sol.x.sum() == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("constraint generation screens the final plan clean") {
    PlanningInstance inst = ieee14_instance(3, 0.45);
    SampleTensor train = weibull_block(3, 10, 41);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.25;

    std::vector<LineTuple> active;
    SolveLog log;
    PlanSolution sol =
        constraint_generation(inst, train, forecast, spec, false, {}, &log, &active);
    MomentTable moments = compute_moments(train);
    auto violated = line_flow_check(inst, sol.x, sol.schedule, train, moments, spec);
    CHECK(violated.empty());
    // The lazily grown set stays far below the full tuple count.
    int total = inst.num_scenarios() * inst.num_periods() * inst.num_lines() * 2;
    CHECK(static_cast<int>(active.size()) <= total);
}

TEST_CASE("cg with inner l shaped matches cg with extensive inner solves") {
    PlanningInstance inst = ieee14_instance(2, 0.6);
    SampleTensor train = weibull_block(2, 8, 43);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::diagonal;
    spec.kappa = 0.3;
    PlanSolution a = solve(inst, train, forecast, spec, Algo::cg);
    PlanSolution b = solve(inst, train, forecast, spec, Algo::cg_l);
    CHECK(a.objective ==
          doctest::Approx(b.objective).epsilon(1e-5).scale(1.0 + std::abs(a.objective)));
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("model dump lands at the requested path") {
    PlanningInstance inst = single_generator_instance(1);
    SampleTensor train = weibull_block(1, 4, 47);
    ForecastTable forecast = forecast_from_samples(train);
    AmbiguitySpec spec;
    spec.mode = RadiusMode::empirical;
    SolveOptions opts;
    auto path = std::filesystem::temp_directory_path() / "windplan_dump_test.txt";
    opts.dump_model_path = path.string();
    solve(inst, train, forecast, spec, Algo::extensive, opts);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string first;
    std::getline(in, first);
    CHECK(first.rfind("vars", 0) == 0);
    in.close();
    std::filesystem::remove(path);
}
