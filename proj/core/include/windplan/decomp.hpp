#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "windplan/mip.hpp"

namespace windplan {

/// Planning decision with its day-ahead schedule and cost decomposition.
struct PlanSolution {
    Eigen::VectorXd x;  // turbines per site, integral
    Schedule schedule;
    double objective = 0.0;
    double investment = 0.0;
    double generation = 0.0;
    double reserve = 0.0;
    double regularizer = 0.0;
    double recourse_mean = 0.0;
};

/// Optimality cut q_st >= coeff_x.x + coeff_up.r_up + coeff_dn.r_dn + constant.
struct Cut {
    int s = 0, t = 0;
    Eigen::VectorXd coeff_x;
    Eigen::VectorXd coeff_up;
    Eigen::VectorXd coeff_dn;
    double constant = 0.0;
    int iteration = 0;
};

struct LogEntry {
    int iter = 0;
    double lb = 0.0, ub = 0.0;
    int cuts = 0;
    int tuples = 0;
    double ms = 0.0;
};

struct SolveLog {
    std::vector<LogEntry> entries;
    std::string to_text() const;  // lines "iter,lb,ub,cuts,tuples,ms"
};

enum class Algo { extensive, cg, cg_l };

struct SolveOptions {
    double nu = 1e-6;           // decomposition relative gap
    int cg_max_iter = 50;
    int lshaped_max_iter = 200;
    double fixed_total_capacity = -1.0;  // when >= 0, pin sum_w x_w to this
    conic::SolverSettings solver;
    BnbSettings bnb;
    std::string dump_model_path;  // when set, write the program text here
};

/// Builds the optimality cut for one (s,t) from the per-sample recourse duals.
Cut build_cut(const PlanningInstance& inst, const SampleTensor& train,
              const ForecastTable& forecast, int s, int t, const RecourseExpectation& rec,
              int iteration);

/// Cost decomposition re-evaluated from the decision itself; the objective is
/// the sum of the parts.
PlanSolution evaluate_plan(const PlanningInstance& inst, const SampleTensor& train,
                           const ForecastTable& forecast, const AmbiguitySpec& spec,
                           const Eigen::VectorXd& x, const Schedule& schedule);

/// Direct solve of the full sample-average model with every line tuple active.
PlanSolution solve_extensive(const PlanningInstance& inst, const SampleTensor& train,
                             const ForecastTable& forecast, const AmbiguitySpec& spec,
                             const SolveOptions& opts = {}, SolveLog* log = nullptr);

/// Cut-based solve of the model restricted to the given active line tuples.
PlanSolution l_shaped(const PlanningInstance& inst, const SampleTensor& train,
                      const ForecastTable& forecast, const AmbiguitySpec& spec,
                      const std::vector<LineTuple>& active, const SolveOptions& opts = {},
                      SolveLog* log = nullptr, std::vector<Cut>* cut_pool = nullptr,
                      const std::vector<std::array<int, 3>>* exact_tuples = nullptr);

/// Lazy generation of line tuples around either inner solver; the final
/// decision passes the distributionally robust line screening.
PlanSolution constraint_generation(const PlanningInstance& inst, const SampleTensor& train,
                                   const ForecastTable& forecast, const AmbiguitySpec& spec,
                                   bool inner_l_shaped, const SolveOptions& opts = {},
                                   SolveLog* log = nullptr,
                                   std::vector<LineTuple>* active_out = nullptr);

PlanSolution solve(const PlanningInstance& inst, const SampleTensor& train,
                   const ForecastTable& forecast, const AmbiguitySpec& spec, Algo algo,
                   const SolveOptions& opts = {}, SolveLog* log = nullptr);

}  // namespace windplan
