#pragma once

#include <compare>
#include <vector>

#include <Eigen/Dense>

#include "windplan/ambiguity.hpp"
#include "windplan/instance.hpp"
#include "windplan/sampling.hpp"

namespace windplan {

/// Optimal point and duals of the per-period adjustment problem.
struct RecourseSolution {
    double value = 0.0;
    Eigen::VectorXd alpha;       // generator adjustments
    double curtailment = 0.0;    // w
    double shedding = 0.0;       // l
    double gamma = 0.0;          // balance row multiplier
    Eigen::VectorXd mu_lower;    // multipliers of alpha >= -up_reserve
    Eigen::VectorXd mu_upper;    // multipliers of alpha <= down_reserve
};

/// Analytic merit-order solve of
///   min sum_g z_g + WC*w + LS*l
///   s.t. z_g >= DA_g a_g, z_g >= -UA_g a_g,
///        sum_g a_g + w - l = e,  -up_reserve_g <= a_g <= down_reserve_g,
/// with dual recovery from the marginal price. Always feasible.
RecourseSolution solve_recourse(double e, const Eigen::VectorXd& up_reserve,
                                const Eigen::VectorXd& down_reserve,
                                const Eigen::VectorXd& up_adjust_cost,
                                const Eigen::VectorXd& down_adjust_cost,
                                double wind_curtail_cost, double load_shed_cost);

struct RecourseExpectation {
    double mean = 0.0;
    std::vector<double> errors;               // e_i per sample
    std::vector<RecourseSolution> per_sample; // duals feed optimality cuts
};

/// (1/N) sum_i h(e_i) with e_i = sum_w x_w (sample_i - forecast) for one
/// (scenario, period) block.
RecourseExpectation empirical_recourse_expectation(
    const Eigen::VectorXd& x, const SampleTensor& train, const ForecastTable& forecast,
    int s, int t, const Eigen::VectorXd& up_reserve, const Eigen::VectorXd& down_reserve,
    const Eigen::VectorXd& up_adjust_cost, const Eigen::VectorXd& down_adjust_cost,
    double wind_curtail_cost, double load_shed_cost);

/// Exact CVaR of the empirical distribution at tail mass eps_risk, i.e. the
/// Rockafellar-Uryasev minimum of eta + mean[v - eta]_+ / eps_risk.
double empirical_cvar(const std::vector<double>& values, double eps_risk);

/// First-stage dispatch and reserve levels, [s] -> T x G.
struct Schedule {
    std::vector<Eigen::MatrixXd> power;
    std::vector<Eigen::MatrixXd> up_reserve;
    std::vector<Eigen::MatrixXd> down_reserve;
};

struct LineTuple {
    int s = 0, t = 0, l = 0, k = 0;  // k in {0,1}: forward / reverse direction
    auto operator<=>(const LineTuple&) const = default;
};

/// Distributionally robust line-flow screening: returns the tuples whose
/// shifted empirical CVaR at eps_risk exceeds the feasibility tolerance.
std::vector<LineTuple> line_flow_check(const PlanningInstance& inst,
                                       const Eigen::VectorXd& x, const Schedule& schedule,
                                       const SampleTensor& train, const MomentTable& moments,
                                       const AmbiguitySpec& spec, double tol = 1e-6);

/// Constant part of the directional flow constraint for one (s,t,l,k),
/// including the worst-case reserve deployment terms.
double line_constant(const PlanningInstance& inst, const Schedule& schedule, int s, int t,
                     int l, int k);

}  // namespace windplan
