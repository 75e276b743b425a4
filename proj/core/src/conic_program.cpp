#include "windplan/conic/program.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace windplan::conic {

int ConicProgram::add_variable(double lb, double ub, double cost, bool integer) {
    cost_.push_back(cost);
    lower_.push_back(lb);
    upper_.push_back(ub);
    integer_.push_back(integer ? 1 : 0);
    return num_vars() - 1;
}

std::vector<int> ConicProgram::integer_vars() const {
    std::vector<int> vars;
    for (int i = 0; i < num_vars(); ++i)
        if (integer_[i]) vars.push_back(i);
    return vars;
}

void ConicProgram::add_equality(LinearRow row) {
    for (auto [i, c] : row.coeffs)
        if (i < 0 || i >= num_vars()) throw std::out_of_range("equality row index");
    equalities_.push_back(std::move(row));
}

void ConicProgram::add_inequality(LinearRow row) {
    for (auto [i, c] : row.coeffs)
        if (i < 0 || i >= num_vars()) throw std::out_of_range("inequality row index");
    inequalities_.push_back(std::move(row));
}

void ConicProgram::add_soc(const std::vector<int>& indices) {
    if (indices.size() < 2) throw std::invalid_argument("SOC block needs length >= 2");
    std::vector<LinearExpr> exprs;
    for (int idx : indices) {
        if (idx < 0 || idx >= num_vars()) throw std::out_of_range("SOC block index");
        LinearExpr e;
        e.add(idx, 1.0);
        exprs.push_back(std::move(e));
    }
    soc_blocks_.push_back(std::move(exprs));
}

void ConicProgram::add_soc_block(std::vector<LinearExpr> exprs) {
    if (exprs.size() < 2) throw std::invalid_argument("SOC block needs length >= 2");
    for (const auto& e : exprs)
        for (auto [i, c] : e.terms)
            if (i < 0 || i >= num_vars()) throw std::out_of_range("SOC block index");
    soc_blocks_.push_back(std::move(exprs));
}

double ConicProgram::objective_value(const Eigen::VectorXd& x) const {
    double v = objective_constant_;
    for (int i = 0; i < num_vars(); ++i) v += cost_[i] * x(i);
    return v;
}

namespace {

std::string fmt(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string row_text(const std::vector<std::pair<int, double>>& coeffs, double rhs,
                     const char* op) {
    std::map<int, double> merged;
    for (auto [i, c] : coeffs) merged[i] += c;
    std::ostringstream os;
    for (auto& [i, c] : merged)
        if (c != 0.0) os << fmt(c) << "*v" << i << " ";
    os << op << " " << fmt(rhs);
    return os.str();
}

}  // namespace

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os << "vars " << num_vars() << "\n";
    os << "min";
    for (int i = 0; i < num_vars(); ++i)
        if (cost_[i] != 0.0) os << " " << fmt(cost_[i]) << "*v" << i;
    if (objective_constant_ != 0.0) os << " + " << fmt(objective_constant_);
    os << "\n";
    for (int i = 0; i < num_vars(); ++i) {
        os << "v" << i << " in [" << fmt(lower_[i]) << ", " << fmt(upper_[i]) << "]";
        if (integer_[i]) os << " integer";
        os << "\n";
    }
    for (const auto& r : equalities_) os << "eq: " << row_text(r.coeffs, r.rhs, "=") << "\n";
    for (const auto& r : inequalities_)
        os << "ineq: " << row_text(r.coeffs, r.rhs, "<=") << "\n";
    for (const auto& block : soc_blocks_) {
        os << "soc:";
        for (const auto& e : block) os << " (" << row_text(e.terms, -e.constant, "|") << ")";
        os << "\n";
    }
    return os.str();
}

std::string ConicProgram::canonical_form() const {
    // Presolve: a variable that appears in no row and no cone is fixed at the
    // bound minimizing its cost and dropped.
    std::vector<char> used(num_vars(), 0);
    for (const auto& r : equalities_)
        for (auto [i, c] : r.coeffs)
            if (c != 0.0) used[i] = 1;
    for (const auto& r : inequalities_)
        for (auto [i, c] : r.coeffs)
            if (c != 0.0) used[i] = 1;
    // A cone whose norm part vanishes reduces to a linear bound on the head;
    // when that bound is already implied by the head variable's own bound the
    // whole block is redundant and the head may drop out entirely.
    auto block_kind = [this](const std::vector<LinearExpr>& block) {
        bool tail_nonzero = false;
        double tail_const_norm = 0;
        for (size_t j = 1; j < block.size(); ++j) {
            for (auto [i, c] : block[j].terms)
                if (c != 0.0) tail_nonzero = true;
            tail_const_norm += block[j].constant * block[j].constant;
        }
        if (tail_nonzero) return 0;  // genuine cone
        const auto& head = block[0];
        if (tail_const_norm == 0.0 && head.terms.size() == 1 && head.constant >= 0.0 &&
            head.terms[0].second > 0.0 && lower_[head.terms[0].first] >= 0.0)
            return 2;  // redundant
        return 1;  // linear bound
    };
    for (const auto& block : soc_blocks_) {
        int kind = block_kind(block);
        if (kind == 2) continue;
        for (size_t j = 0; j < block.size(); ++j) {
            if (j > 0 && kind == 1) continue;
            for (auto [i, c] : block[j].terms)
                if (c != 0.0) used[i] = 1;
        }
    }

    double fixed_cost = objective_constant_;
    std::vector<double> fixed_value(num_vars(), 0.0);
    std::vector<char> dropped(num_vars(), 0);
    for (int i = 0; i < num_vars(); ++i) {
        if (used[i]) continue;
        double v;
        if (cost_[i] > 0)
            v = lower_[i];
        else if (cost_[i] < 0)
            v = upper_[i];
        else
            v = std::isfinite(lower_[i]) ? lower_[i] : 0.0;
        if (!std::isfinite(v)) continue;  // unbounded direction, keep it visible
        fixed_value[i] = v;
        fixed_cost += cost_[i] * v;
        dropped[i] = 1;
    }

    // Stable renumbering by structural signature: sort remaining variables by
    // (cost, lb, ub, integer) then by first-use position in sorted rows.
    std::vector<int> keep;
    for (int i = 0; i < num_vars(); ++i)
        if (!dropped[i]) keep.push_back(i);

    std::vector<std::string> lines;
    auto canon_row = [&](const std::vector<std::pair<int, double>>& coeffs, double rhs,
                         const char* tag) {
        std::map<int, double> merged;
        for (auto [i, c] : coeffs)
            if (!dropped[i]) merged[i] += c;
        double adj = rhs;
        for (auto [i, c] : coeffs)
            if (dropped[i]) adj -= c * fixed_value[i];
        std::ostringstream os;
        os << tag << ":";
        for (auto& [i, c] : merged)
            if (c != 0.0)
                os << " " << fmt(c) << "*[" << fmt(cost_[i]) << "," << fmt(lower_[i]) << ","
                   << fmt(upper_[i]) << "," << int(integer_[i]) << "]";
        os << " : " << fmt(adj);
        return os.str();
    };

    for (const auto& r : equalities_) lines.push_back(canon_row(r.coeffs, r.rhs, "eq"));
    for (const auto& r : inequalities_) lines.push_back(canon_row(r.coeffs, r.rhs, "le"));
    for (const auto& block : soc_blocks_) {
        int kind = block_kind(block);
        if (kind == 2) continue;
        bool tail_nonzero = false;
        double tail_const_norm = 0;
        for (size_t j = 1; j < block.size(); ++j) {
            for (auto [i, c] : block[j].terms)
                if (c != 0.0 && !dropped[i]) tail_nonzero = true;
            tail_const_norm += block[j].constant * block[j].constant;
        }
        if (!tail_nonzero) {
            // Degenerate cone: head >= ||tail constants||.
            std::vector<std::pair<int, double>> coeffs;
            for (auto [i, c] : block[0].terms) coeffs.emplace_back(i, -c);
            lines.push_back(
                canon_row(coeffs, block[0].constant - std::sqrt(tail_const_norm), "le"));
            continue;
        }
        std::vector<std::string> parts;
        for (size_t j = 1; j < block.size(); ++j)
            parts.push_back(canon_row(block[j].terms, -block[j].constant, "x"));
        std::sort(parts.begin(), parts.end());
        std::ostringstream os;
        os << "soc head " << canon_row(block[0].terms, -block[0].constant, "h") << " tail";
        for (auto& p : parts) os << " {" << p << "}";
        lines.push_back(os.str());
    }
    std::sort(lines.begin(), lines.end());

    std::ostringstream os;
    os << "objconst " << fmt(fixed_cost) << "\n";
    std::vector<std::string> varsigs;
    for (int i : keep) {
        std::ostringstream vs;
        vs << "var [" << fmt(cost_[i]) << "," << fmt(lower_[i]) << "," << fmt(upper_[i])
           << "," << int(integer_[i]) << "]";
        varsigs.push_back(vs.str());
    }
    std::sort(varsigs.begin(), varsigs.end());
    for (auto& v : varsigs) os << v << "\n";
    for (auto& l : lines) os << l << "\n";
    return os.str();
}

int lower_quadratic_objective(ConicProgram& program, int var, double coeff, double weight) {
    if (coeff < 0) throw std::invalid_argument("quadratic coefficient must be nonnegative");
    if (coeff == 0.0) return -1;
    // t >= coeff * var^2  <=>  ||(2*sqrt(coeff)*var, t - 1)|| <= t + 1
    int t = program.add_variable(0.0, kInf, weight);
    LinearExpr head, mid, tail;
    head.add(t, 1.0);
    head.constant = 1.0;
    mid.add(var, 2.0 * std::sqrt(coeff));
    tail.add(t, 1.0);
    tail.constant = -1.0;
    program.add_soc_block({head, mid, tail});
    return t;
}

}  // namespace windplan::conic
