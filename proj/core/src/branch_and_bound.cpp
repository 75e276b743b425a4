#include "windplan/mip.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace windplan {

using conic::ConicProgram;
using conic::PrimalDualSolution;
using conic::SolveStatus;
using Eigen::VectorXd;

namespace {

struct Node {
    double bound = 0.0;
    long id = 0;  // creation order, breaks bound ties deterministically
    std::vector<std::pair<int, std::pair<double, double>>> fixes;  // var -> (lb, ub)
    VectorXd relax_x;

    bool operator>(const Node& other) const {
        if (bound != other.bound) return bound > other.bound;
        return id > other.id;
    }
};

PrimalDualSolution solve_with_fixes(const ConicProgram& base,
                                    const std::vector<std::pair<int, std::pair<double, double>>>& fixes,
                                    const conic::SolverSettings& settings) {
    ConicProgram prog = base;
    for (const auto& [var, bounds] : fixes) prog.set_bounds(var, bounds.first, bounds.second);
    return conic::solve_conic(prog, settings);
}

// An interior-point run that hit its iteration cap a hair above the target
// tolerance still carries a usable relaxation bound; only prune on genuine
// infeasibility.
bool usable(const PrimalDualSolution& sol) {
    if (sol.status == SolveStatus::optimal) return true;
    return sol.status == SolveStatus::iteration_limit &&
           std::max({sol.r_primal, sol.r_dual, sol.r_gap}) <= 1e-6;
}

}  // namespace

IntegerSolution branch_and_bound(const ConicProgram& program,
                                 const conic::SolverSettings& solver_settings,
                                 const BnbSettings& settings) {
    IntegerSolution best;
    const std::vector<int> ints = program.integer_vars();

    auto fractional = [&](const VectorXd& x) {
        // Most fractional integer variable, lowest index on ties.
        int pick = -1;
        double score = settings.int_tol;
        for (int v : ints) {
            double frac = x(v) - std::floor(x(v));
            double dist = std::min(frac, 1.0 - frac);
            if (dist > score + 1e-15) {
                score = dist;
                pick = v;
            }
        }
        return pick;
    };

    PrimalDualSolution root = conic::solve_conic(program, solver_settings);
    best.nodes = 1;
    if (!usable(root)) {
        best.status = root.status;
        return best;
    }

    double ub = std::numeric_limits<double>::infinity();
    VectorXd incumbent;

    auto try_incumbent = [&](const VectorXd& x, double objective) {
        if (objective < ub - 1e-12) {
            ub = objective;
            incumbent = x;
        }
    };

    if (!ints.empty() && fractional(root.x) >= 0) {
        // Rounding heuristic for an initial incumbent.
        std::vector<std::pair<int, std::pair<double, double>>> fixes;
        for (int v : ints) {
            double r = std::round(root.x(v));
            r = std::min(std::max(r, program.lower(v)), program.upper(v));
            fixes.push_back({v, {r, r}});
        }
        auto rounded = solve_with_fixes(program, fixes, solver_settings);
        if (usable(rounded)) try_incumbent(rounded.x, rounded.objective);
    }

    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    long next_id = 0;
    open.push({root.objective, next_id++, {}, root.x});

    double lb = root.objective;
    bool exhausted = true;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        lb = node.bound;
        double tol = settings.gap_tol * std::max(1.0, std::abs(ub));
        if (lb >= ub - tol) {
            exhausted = false;
            break;
        }

        int branch_var = fractional(node.relax_x);
        if (branch_var < 0) {
            try_incumbent(node.relax_x, node.bound);
            continue;
        }
        double val = node.relax_x(branch_var);
        double floor_val = std::floor(val);
        double base_lb = program.lower(branch_var);
        double base_ub = program.upper(branch_var);
        for (const auto& [var, b] : node.fixes)
            if (var == branch_var) {
                base_lb = b.first;
                base_ub = b.second;
            }
        std::pair<double, double> down{base_lb, std::min(base_ub, floor_val)};
        std::pair<double, double> up{std::max(base_lb, floor_val + 1.0), base_ub};
        for (const auto& child_bounds : {down, up}) {
            if (child_bounds.first > child_bounds.second + 1e-12) continue;
            Node child;
            child.fixes = node.fixes;
            child.fixes.push_back({branch_var, child_bounds});
            auto sol = solve_with_fixes(program, child.fixes, solver_settings);
            if (++best.nodes > settings.max_nodes)
                throw std::runtime_error("branch and bound node limit exceeded");
            if (!usable(sol)) continue;  // pruned by infeasibility
            if (sol.objective >= ub - settings.gap_tol * std::max(1.0, std::abs(ub)))
                continue;
            if (fractional(sol.x) < 0) {
                try_incumbent(sol.x, sol.objective);
                continue;
            }
            child.bound = sol.objective;
            child.id = next_id++;
            child.relax_x = sol.x;
            open.push(std::move(child));
        }
    }

    if (!std::isfinite(ub)) {
        // No integral point found below the node limit; with bounded integer
        // boxes this only happens when the model is integer-infeasible.
        best.status = SolveStatus::infeasible;
        return best;
    }
    best.status = SolveStatus::optimal;
    best.x = incumbent;
    best.objective = ub;
    if (exhausted) lb = ub;  // search tree fully enumerated
    lb = std::min(lb, ub);
    best.gap = (ub - lb) / std::max(1.0, std::abs(ub));
    return best;
}

}  // namespace windplan
