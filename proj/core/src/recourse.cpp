#include "windplan/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace windplan {

using Eigen::VectorXd;

namespace {

struct MeritUnit {
    double cost;
    double capacity;
    int id;  // generator index, or -1 for the slack option (curtail / shed)
};

}  // namespace

RecourseSolution solve_recourse(double e, const VectorXd& up_reserve,
                                const VectorXd& down_reserve, const VectorXd& up_adjust_cost,
                                const VectorXd& down_adjust_cost, double wind_curtail_cost,
                                double load_shed_cost) {
    const int g = static_cast<int>(up_reserve.size());
    RecourseSolution sol;
    sol.alpha = VectorXd::Zero(g);
    sol.mu_lower = VectorXd::Zero(g);
    sol.mu_upper = VectorXd::Zero(g);
    if (e == 0.0) return sol;

    const bool surplus = e > 0;
    double need = std::abs(e);

    std::vector<MeritUnit> units;
    units.reserve(g + 1);
    for (int i = 0; i < g; ++i) {
        double cap = surplus ? down_reserve(i) : up_reserve(i);
        if (cap > 0)
            units.push_back({surplus ? down_adjust_cost(i) : up_adjust_cost(i), cap, i});
    }
    units.push_back({surplus ? wind_curtail_cost : load_shed_cost,
                     std::numeric_limits<double>::infinity(), -1});
    std::sort(units.begin(), units.end(), [](const MeritUnit& a, const MeritUnit& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.id < 0 || b.id < 0) return b.id < 0;  // slack option last on ties
        return a.id < b.id;
    });

    double marginal = 0.0;
    for (const auto& u : units) {
        if (need <= 0) break;
        double take = std::min(need, u.capacity);
        need -= take;
        marginal = u.cost;
        sol.value += u.cost * take;
        if (u.id >= 0)
            sol.alpha(u.id) = surplus ? take : -take;
        else if (surplus)
            sol.curtailment = take;
        else
            sol.shedding = take;
    }

    // Dual recovery: the balance multiplier carries the marginal price (price
    // of the last unit actually dispatched) and saturated reserve bounds pick
    // up the cost gap to it.
    sol.gamma = surplus ? -marginal : marginal;
    for (int i = 0; i < g; ++i) {
        if (surplus) {
            double gap = marginal - down_adjust_cost(i);
            if (gap > 0 && sol.alpha(i) >= down_reserve(i)) sol.mu_upper(i) = gap;
        } else {
            double gap = marginal - up_adjust_cost(i);
            if (gap > 0 && sol.alpha(i) <= -up_reserve(i)) sol.mu_lower(i) = gap;
        }
    }
    return sol;
}

RecourseExpectation empirical_recourse_expectation(
    const VectorXd& x, const SampleTensor& train, const ForecastTable& forecast, int s, int t,
    const VectorXd& up_reserve, const VectorXd& down_reserve, const VectorXd& up_adjust_cost,
    const VectorXd& down_adjust_cost, double wind_curtail_cost, double load_shed_cost) {
    const int n = train.num_samples();
    const int w = train.num_sites();
    if (x.size() != w) throw std::invalid_argument("x dimension mismatch");
    RecourseExpectation out;
    out.errors.reserve(n);
    out.per_sample.reserve(n);
    for (int i = 0; i < n; ++i) {
        double e = 0.0;
        for (int j = 0; j < w; ++j)
            e += x(j) * (train.at(s, t, j, i) - forecast.at(s, t, j));
        out.errors.push_back(e);
        out.per_sample.push_back(solve_recourse(e, up_reserve, down_reserve, up_adjust_cost,
                                                down_adjust_cost, wind_curtail_cost,
                                                load_shed_cost));
        out.mean += out.per_sample.back().value;
    }
    if (n > 0) out.mean /= n;
    return out;
}

double empirical_cvar(const std::vector<double>& values, double eps_risk) {
    if (values.empty()) throw std::invalid_argument("empirical_cvar of empty sample");
    if (eps_risk <= 0.0 || eps_risk > 1.0)
        throw std::invalid_argument("eps_risk must lie in (0,1]");
    std::vector<double> v = values;
    std::sort(v.begin(), v.end(), std::greater<>());
    const double n = static_cast<double>(v.size());
    const int k = static_cast<int>(std::ceil(eps_risk * n - 1e-12));
    double acc = 0.0;
    for (int i = 0; i + 1 < k; ++i) acc += v[i] / n;
    acc += (eps_risk - (k - 1) / n) * v[k - 1];
    return acc / eps_risk;
}

double line_constant(const PlanningInstance& inst, const Schedule& schedule, int s, int t,
                     int l, int k) {
    const auto& line = inst.lines[l];
    const int g = inst.num_generators();
    double v = 0.0;
    for (int i = 0; i < g; ++i) {
        double pi = line.ptdf_gen(i);
        double p = schedule.power[s](t, i);
        double band = schedule.up_reserve[s](t, i) + schedule.down_reserve[s](t, i);
        double rdn = schedule.down_reserve[s](t, i);
        if (k == 0)
            v += pi * p + std::max(-pi, 0.0) * band + pi * rdn;
        else
            v += -pi * p + std::max(pi, 0.0) * band - pi * rdn;
    }
    double load_term = 0.0;
    for (int d = 0; d < inst.scenarios.loads[s].cols(); ++d)
        load_term += line.ptdf_load(d) * inst.scenarios.load(s, t, d);
    v += (k == 0 ? -load_term : load_term);
    return v - line.capacity;
}

std::vector<LineTuple> line_flow_check(const PlanningInstance& inst, const VectorXd& x,
                                       const Schedule& schedule, const SampleTensor& train,
                                       const MomentTable& moments, const AmbiguitySpec& spec,
                                       double tol) {
    std::vector<LineTuple> violated;
    const int n = train.num_samples();
    const int w = train.num_sites();
    std::vector<double> vals(n);
    for (int s = 0; s < inst.num_scenarios(); ++s)
        for (int t = 0; t < inst.num_periods(); ++t)
            for (int l = 0; l < inst.num_lines(); ++l) {
                const auto& line = inst.lines[l];
                double rho = radius(x, line.ptdf_wind, moments.cov(s, t),
                                    spec.kappa_for_line(s, t, l), spec.mode);
                double shift = rho / inst.costs.eps_risk;
                for (int k = 0; k < 2; ++k) {
                    double base = line_constant(inst, schedule, s, t, l, k);
                    double sign = (k == 0) ? 1.0 : -1.0;
                    for (int i = 0; i < n; ++i) {
                        double flow = 0.0;
                        for (int j = 0; j < w; ++j)
                            flow += line.ptdf_wind(j) * x(j) * train.at(s, t, j, i);
                        vals[i] = sign * flow + base;
                    }
                    if (empirical_cvar(vals, inst.costs.eps_risk) + shift > tol)
                        violated.push_back({s, t, l, k});
                }
            }
    return violated;
}

}  // namespace windplan
