#pragma once

#include <array>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "windplan/ambiguity.hpp"
#include "windplan/conic/program.hpp"
#include "windplan/conic/solver.hpp"
#include "windplan/instance.hpp"
#include "windplan/recourse.hpp"
#include "windplan/sampling.hpp"

namespace windplan {

enum class CvarForm { defaulted, exact };

/// Conic program for the joint planning problem plus the index maps needed to
/// read a solution back out, extend the active line set, or add cuts.
struct AssembledModel {
    conic::ConicProgram program;

    PlanningInstance inst;
    SampleTensor train;
    ForecastTable forecast;
    MomentTable moments;
    AmbiguitySpec spec;
    double phi = 0.0;   // objective multiplier of the radius variables
    bool master = false;  // recourse replaced by cut epigraphs q_st

    std::vector<int> x;                            // [w]
    std::vector<Eigen::MatrixXi> power;            // [s] -> T x G
    std::vector<Eigen::MatrixXi> up_reserve;       // [s] -> T x G
    std::vector<Eigen::MatrixXi> down_reserve;     // [s] -> T x G
    Eigen::MatrixXi theta;                         // S x T, -1 when absent
    Eigen::MatrixXi q;                             // S x T, -1 unless master
    std::vector<Eigen::MatrixXi> adjust;           // [s*T+t] -> G x N (alpha)
    std::vector<Eigen::MatrixXi> adjust_cost;      // [s*T+t] -> G x N (z)
    std::vector<Eigen::VectorXi> curtail;          // [s*T+t] -> N (w)
    std::vector<Eigen::VectorXi> shed;             // [s*T+t] -> N (l)

    struct CvarEntry {
        int eta = -1;
        int theta = -1;
        bool has_default = false;
        bool has_exact = false;
    };
    std::map<std::array<int, 3>, CvarEntry> cvar;  // keyed (s,t,l)

    Schedule read_schedule(const Eigen::VectorXd& primal) const;
    Eigen::VectorXd read_plan(const Eigen::VectorXd& primal) const;
};

/// Full sample-average model: first-stage dispatch, radius cones, per-sample
/// recourse rows, and CVaR line rows for the given active tuples.
AssembledModel assemble_extensive(const PlanningInstance& inst, const SampleTensor& train,
                                  const ForecastTable& forecast, const AmbiguitySpec& spec,
                                  const std::vector<LineTuple>& active);

/// Cut-based master: same first stage, recourse replaced by epigraphs
/// q_st >= 0 awaiting optimality cuts.
AssembledModel assemble_master(const PlanningInstance& inst, const SampleTensor& train,
                               const ForecastTable& forecast, const AmbiguitySpec& spec,
                               const std::vector<LineTuple>& active);

/// Distributionally robust line rows for tuple (s,t,l). The default form adds
/// both directional mean rows, the zero row and the radius cone; the exact
/// form adds the per-sample epigraph of the tail average for both directions.
void add_cvar_rows(AssembledModel& model, int s, int t, int l, CvarForm form);

struct BnbSettings {
    double int_tol = 1e-6;
    double gap_tol = 1e-6;
    int max_nodes = 200000;
};

struct IntegerSolution {
    conic::SolveStatus status = conic::SolveStatus::iteration_limit;
    Eigen::VectorXd x;       // full primal vector of the program
    double objective = 0.0;
    double gap = 0.0;
    int nodes = 0;
};

/// Best-first branch and bound over continuous conic relaxations. Branches on
/// the most fractional integer variable, lowest index on ties.
IntegerSolution branch_and_bound(const conic::ConicProgram& program,
                                 const conic::SolverSettings& solver_settings = {},
                                 const BnbSettings& settings = {});

}  // namespace windplan
