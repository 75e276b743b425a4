#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace windplan::conic {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse affine expression: sum of coeff*var plus a constant.
struct LinearExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinearExpr() = default;
    LinearExpr(std::initializer_list<std::pair<int, double>> t, double c = 0.0)
        : terms(t), constant(c) {}
    void add(int var, double coeff) {
        if (coeff != 0.0) terms.emplace_back(var, coeff);
    }
    double evaluate(const Eigen::VectorXd& x) const {
        double v = constant;
        for (auto [i, c] : terms) v += c * x(i);
        return v;
    }
};

struct LinearRow {
    std::vector<std::pair<int, double>> coeffs;
    double rhs = 0.0;
};

/// Solver-agnostic program: minimize c'x subject to equality rows,
/// inequality (<=) rows, variable bounds, second-order-cone blocks, and
/// integrality marks on planning variables.
class ConicProgram {
  public:
    int add_variable(double lb = -kInf, double ub = kInf, double cost = 0.0,
                     bool integer = false);
    int num_vars() const { return static_cast<int>(cost_.size()); }

    void set_cost(int var, double cost) { cost_[var] = cost; }
    void add_cost(int var, double cost) { cost_[var] += cost; }
    double cost(int var) const { return cost_[var]; }
    void add_objective_constant(double c) { objective_constant_ += c; }
    double objective_constant() const { return objective_constant_; }

    void set_bounds(int var, double lb, double ub) {
        lower_[var] = lb;
        upper_[var] = ub;
    }
    double lower(int var) const { return lower_[var]; }
    double upper(int var) const { return upper_[var]; }

    void set_integer(int var, bool flag = true) { integer_[var] = flag; }
    bool is_integer(int var) const { return integer_[var]; }
    std::vector<int> integer_vars() const;

    void add_equality(LinearRow row);
    void add_inequality(LinearRow row);  // coeffs . x <= rhs

    /// Cone membership of plain variables: ||(u_1..u_k)|| <= u_0 with
    /// indices = [u_0, u_1, ..., u_k].
    void add_soc(const std::vector<int>& indices);
    /// Cone membership of affine expressions (first entry is the bound).
    void add_soc_block(std::vector<LinearExpr> exprs);

    const std::vector<LinearRow>& equalities() const { return equalities_; }
    const std::vector<LinearRow>& inequalities() const { return inequalities_; }
    const std::vector<std::vector<LinearExpr>>& soc_blocks() const { return soc_blocks_; }

    double objective_value(const Eigen::VectorXd& x) const;

    /// Plain-text matrix dump for diffing against external solvers.
    std::string dump() const;

    /// Presolved, sorted, order-independent textual form. Two programs that
    /// differ only in variable ordering or in trivially-fixed variables
    /// canonicalize to the same string.
    std::string canonical_form() const;

  private:
    std::vector<double> cost_, lower_, upper_;
    std::vector<char> integer_;
    double objective_constant_ = 0.0;
    std::vector<LinearRow> equalities_;
    std::vector<LinearRow> inequalities_;
    std::vector<std::vector<LinearExpr>> soc_blocks_;
};

/// Replaces quadratic objective terms coeff*var^2 (coeff >= 0) with SOC
/// epigraphs. Returns the epigraph variable carrying objective weight
/// `weight`, or -1 when coeff == 0.
int lower_quadratic_objective(ConicProgram& program, int var, double coeff, double weight);

}  // namespace windplan::conic
