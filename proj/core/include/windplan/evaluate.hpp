#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windplan/decomp.hpp"

namespace windplan {

/// Reserve cost plus mean out-of-sample recourse cost of a fixed decision.
double risk_management_cost(const PlanningInstance& inst, const Eigen::VectorXd& x,
                            const Schedule& schedule, const SampleTensor& test,
                            const ForecastTable& forecast);

/// Sample variance (divisor N-1) of the aggregated output sum_w x_w xi_i.
double smoothing_variance(const Eigen::VectorXd& x, const SampleTensor& test, int s, int t);

/// Mean of smoothing_variance over all (s,t) blocks.
double mean_smoothing_variance(const Eigen::VectorXd& x, const SampleTensor& test);

struct CrossValidationResult {
    double best_kappa = 0.0;
    std::vector<std::pair<double, double>> scores;  // (kappa, validation metric)
};

/// Solves per grid point on the training set and scores on the validation
/// set; returns the argmin with the lowest kappa on ties.
CrossValidationResult cross_validate_kappa(
    const PlanningInstance& inst, const SampleTensor& train, const SampleTensor& validation,
    const ForecastTable& forecast, const AmbiguitySpec& base_spec,
    const std::vector<double>& grid, Algo algo = Algo::cg, const SolveOptions& opts = {});

struct MethodSpec {
    std::string name;
    RadiusMode mode = RadiusMode::empirical;
    double kappa = 0.0;
};

struct MethodCell {
    std::string method;
    uint64_t seed = 0;
    double risk_cost = 0.0;
    double smoothing = 0.0;
    double objective = 0.0;
    double investment = 0.0;
    double generation = 0.0;
    Eigen::VectorXd x;
};

struct EvaluationReport {
    std::vector<MethodCell> cells;
    std::string to_csv() const;
};

/// Draws (train, test) per seed, solves each method with the total capacity
/// pinned to X, and reports out-of-sample metrics per (method, seed).
EvaluationReport compare_methods(
    const PlanningInstance& inst,
    const std::function<std::pair<SampleTensor, SampleTensor>(uint64_t)>& sampler,
    const std::vector<MethodSpec>& methods, double total_capacity,
    const std::vector<uint64_t>& seeds, Algo algo = Algo::cg, const SolveOptions& opts = {});

/// Fraction of trials in which the in-sample certificate (empirical mean plus
/// regularizer) covers the true expected recourse cost, the latter estimated
/// by Monte Carlo at the solved decision.
double guarantee_coverage(const PlanningInstance& inst,
                          const std::function<SampleTensor(int, uint64_t)>& sampler,
                          double kappa, RadiusMode mode, int trials, int n_train,
                          int n_eval = 100000, uint64_t seed = 1,
                          const SolveOptions& opts = {});

}  // namespace windplan
