#pragma once

#include <Eigen/Dense>

#include "windplan/conic/program.hpp"

namespace windplan::conic {

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

struct SolverSettings {
    double tol = 1e-8;
    int max_iter = 200;
};

struct PrimalDualSolution {
    SolveStatus status = SolveStatus::iteration_limit;
    Eigen::VectorXd x;        // primal point (original variables)
    Eigen::VectorXd eq_dual;  // multipliers of equality rows
    Eigen::VectorXd cone_dual;  // multipliers of the standard-form cone rows
    double objective = 0.0;     // includes the program's objective constant
    double r_primal = 0.0;
    double r_dual = 0.0;
    double r_gap = 0.0;
    int iterations = 0;
};

/// Homogeneous self-dual primal-dual interior-point solve with Nesterov-Todd
/// scaling and a Mehrotra predictor-corrector. Integrality marks are ignored.
PrimalDualSolution solve_conic(const ConicProgram& program,
                               const SolverSettings& settings = {});

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

/// Exact KKT residual evaluation, independent of the solver internals.
Residuals residuals(const ConicProgram& program, const PrimalDualSolution& solution);

}  // namespace windplan::conic
