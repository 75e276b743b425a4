#include "windplan/mip.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace windplan {

using conic::ConicProgram;
using conic::kInf;
using conic::LinearExpr;
using conic::LinearRow;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

/// First stage shared by the extensive model and the L-shaped master:
/// planning variables, dispatch, reserves, ramping, radius cones.
AssembledModel assemble_first_stage(const PlanningInstance& inst, const SampleTensor& train,
                                    const ForecastTable& forecast, const AmbiguitySpec& spec) {
    const int S = inst.num_scenarios(), T = inst.num_periods();
    const int G = inst.num_generators(), W = inst.num_sites();
    if (train.num_sites() != W || forecast.num_sites() != W)
        throw std::invalid_argument("sample dimensions do not match the instance");
    if (train.num_scenarios() != S || train.num_periods() != T)
        throw std::invalid_argument("sample grid does not match the instance");
    if (spec.mode != RadiusMode::empirical && train.num_samples() < 2)
        throw std::invalid_argument("covariance radius modes need at least 2 samples");

    AssembledModel m;
    m.inst = inst;
    m.train = train;
    m.forecast = forecast;
    m.moments = moments_for(spec, train);
    m.spec = spec;
    m.phi = std::max(inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);

    ConicProgram& prog = m.program;
    for (int w = 0; w < W; ++w)
        m.x.push_back(prog.add_variable(0.0, inst.wind_sites[w].max_turbines,
                                        inst.wind_sites[w].unit_cost, true));

    m.theta = MatrixXi::Constant(S, T, -1);
    m.q = MatrixXi::Constant(S, T, -1);
    for (int s = 0; s < S; ++s) {
        const double dur = inst.scenarios.duration_hours[s];
        MatrixXi p(T, G), ru(T, G), rd(T, G);
        for (int t = 0; t < T; ++t) {
            for (int g = 0; g < G; ++g) {
                const auto& gen = inst.generators[g];
                p(t, g) = prog.add_variable(0.0, gen.p_max, dur * gen.cost_b);
                ru(t, g) = prog.add_variable(0.0, gen.p_max, dur * gen.up_reserve_cost);
                rd(t, g) = prog.add_variable(0.0, gen.p_max, dur * gen.down_reserve_cost);
                prog.add_objective_constant(dur * gen.cost_c);
                conic::lower_quadratic_objective(prog, p(t, g), gen.cost_a, dur);
                // p_min + r_dn <= P <= p_max - r_up
                prog.add_inequality({{{rd(t, g), 1.0}, {p(t, g), -1.0}}, -gen.p_min});
                prog.add_inequality({{{p(t, g), 1.0}, {ru(t, g), 1.0}}, gen.p_max});
            }
            // Power balance with forecast wind generation.
            LinearRow balance;
            for (int g = 0; g < G; ++g) balance.coeffs.emplace_back(p(t, g), 1.0);
            for (int w = 0; w < W; ++w)
                balance.coeffs.emplace_back(m.x[w], forecast.at(s, t, w));
            balance.rhs = inst.scenarios.total_load(s, t);
            prog.add_equality(std::move(balance));
            if (t > 0) {
                for (int g = 0; g < G; ++g) {
                    const auto& gen = inst.generators[g];
                    prog.add_inequality({{{p(t, g), 1.0},
                                          {ru(t, g), 1.0},
                                          {p(t - 1, g), -1.0},
                                          {rd(t - 1, g), 1.0}},
                                         gen.ramp_up});
                    prog.add_inequality({{{p(t - 1, g), 1.0},
                                          {ru(t - 1, g), 1.0},
                                          {p(t, g), -1.0},
                                          {rd(t, g), 1.0}},
                                         gen.ramp_down});
                }
            }
            if (spec.mode != RadiusMode::empirical) {
                // theta_st >= || kappa R x || with R'R the covariance factor;
                // kappa is folded into the cone so the objective weight is phi.
                int th = prog.add_variable(0.0, kInf, dur * m.phi);
                m.theta(s, t) = th;
                double kap = spec.kappa_objective(s, t);
                MatrixXd R = kap * covariance_factor(m.moments.cov(s, t), spec.mode);
                std::vector<LinearExpr> block;
                LinearExpr head;
                head.add(th, 1.0);
                block.push_back(head);
                for (int r = 0; r < W; ++r) {
                    LinearExpr row;
                    for (int w = 0; w < W; ++w) row.add(m.x[w], R(r, w));
                    block.push_back(row);
                }
                prog.add_soc_block(std::move(block));
            }
        }
        m.power.push_back(p);
        m.up_reserve.push_back(ru);
        m.down_reserve.push_back(rd);
    }
    return m;
}

}  // namespace

void add_cvar_rows(AssembledModel& m, int s, int t, int l, CvarForm form) {
    const PlanningInstance& inst = m.inst;
    const auto& line = inst.lines[l];
    const int G = inst.num_generators(), W = inst.num_sites();
    const int N = m.train.num_samples();
    const double eps = inst.costs.eps_risk;
    ConicProgram& prog = m.program;

    auto& entry = m.cvar[{s, t, l}];
    if (form == CvarForm::defaulted && entry.has_default)
        throw std::invalid_argument("default line rows already present for this tuple");
    if (form == CvarForm::exact && entry.has_exact)
        throw std::invalid_argument("exact line rows already present for this tuple");

    if (entry.eta < 0) {
        entry.eta = prog.add_variable(-kInf, kInf, 0.0);
        if (m.spec.mode != RadiusMode::empirical) {
            entry.theta = prog.add_variable(0.0, kInf, 0.0);
            double kap = m.spec.kappa_for_line(s, t, l);
            MatrixXd R = kap * covariance_factor(m.moments.cov(s, t), m.spec.mode);
            std::vector<LinearExpr> block;
            LinearExpr head;
            head.add(entry.theta, 1.0);
            block.push_back(head);
            for (int r = 0; r < W; ++r) {
                LinearExpr row;
                for (int w = 0; w < W; ++w)
                    row.add(m.x[w], R(r, w) * line.ptdf_wind(w));
                block.push_back(row);
            }
            prog.add_soc_block(std::move(block));
        }
    }

    // Variable part of l0 for direction k, plus the load/capacity constant.
    auto direction_terms = [&](int k, LinearRow& row, double& constant) {
        for (int g = 0; g < G; ++g) {
            double pi = line.ptdf_gen(g);
            double sgn = (k == 0) ? 1.0 : -1.0;
            double band = (k == 0) ? std::max(-pi, 0.0) : std::max(pi, 0.0);
            row.coeffs.emplace_back(m.power[s](t, g), sgn * pi);
            row.coeffs.emplace_back(m.up_reserve[s](t, g), band);
            row.coeffs.emplace_back(m.down_reserve[s](t, g), band + sgn * pi);
        }
        double load_term = 0.0;
        for (int d = 0; d < inst.scenarios.loads[s].cols(); ++d)
            load_term += line.ptdf_load(d) * inst.scenarios.load(s, t, d);
        constant = ((k == 0) ? -load_term : load_term) - line.capacity;
    };

    if (form == CvarForm::defaulted) {
        entry.has_default = true;
        // Directional mean rows, scaled through by eps:
        //   eps*eta + l0_k - eta + theta +- mean wind term <= 0.
        for (int k = 0; k < 2; ++k) {
            LinearRow row;
            double constant = 0.0;
            row.coeffs.emplace_back(entry.eta, eps - 1.0);
            if (entry.theta >= 0) row.coeffs.emplace_back(entry.theta, 1.0);
            direction_terms(k, row, constant);
            double sgn = (k == 0) ? 1.0 : -1.0;
            for (int w = 0; w < W; ++w) {
                double mean = 0.0;
                for (int i = 0; i < N; ++i) mean += m.train.at(s, t, w, i);
                mean /= N;
                row.coeffs.emplace_back(m.x[w], sgn * line.ptdf_wind(w) * mean);
            }
            row.rhs = -constant;
            prog.add_inequality(std::move(row));
        }
        LinearRow zero_row;
        zero_row.coeffs.emplace_back(entry.eta, eps);
        if (entry.theta >= 0) zero_row.coeffs.emplace_back(entry.theta, 1.0);
        zero_row.rhs = 0.0;
        prog.add_inequality(std::move(zero_row));
    } else {
        entry.has_exact = true;
        // Per-sample tail epigraph of CVaR for each direction:
        //   u_i >= v_ki - eta, u_i >= 0,
        //   eps*eta + (1/N) sum_i u_i + theta <= 0.
        for (int k = 0; k < 2; ++k) {
            LinearRow main;
            main.coeffs.emplace_back(entry.eta, eps);
            if (entry.theta >= 0) main.coeffs.emplace_back(entry.theta, 1.0);
            double sgn = (k == 0) ? 1.0 : -1.0;
            for (int i = 0; i < N; ++i) {
                int u = prog.add_variable(0.0, kInf, 0.0);
                main.coeffs.emplace_back(u, 1.0 / N);
                LinearRow row;
                double constant = 0.0;
                direction_terms(k, row, constant);
                for (int w = 0; w < W; ++w)
                    row.coeffs.emplace_back(m.x[w],
                                            sgn * line.ptdf_wind(w) * m.train.at(s, t, w, i));
                row.coeffs.emplace_back(entry.eta, -1.0);
                row.coeffs.emplace_back(u, -1.0);
                row.rhs = -constant;
                prog.add_inequality(std::move(row));
            }
            main.rhs = 0.0;
            prog.add_inequality(std::move(main));
        }
    }
}

AssembledModel assemble_extensive(const PlanningInstance& inst, const SampleTensor& train,
                                  const ForecastTable& forecast, const AmbiguitySpec& spec,
                                  const std::vector<LineTuple>& active) {
    AssembledModel m = assemble_first_stage(inst, train, forecast, spec);
    const int S = inst.num_scenarios(), T = inst.num_periods();
    const int G = inst.num_generators(), W = inst.num_sites();
    const int N = train.num_samples();
    ConicProgram& prog = m.program;

    for (int s = 0; s < S; ++s) {
        const double dur = inst.scenarios.duration_hours[s];
        for (int t = 0; t < T; ++t) {
            MatrixXi alpha(G, N), z(G, N);
            VectorXi wv(N), lv(N);
            for (int i = 0; i < N; ++i) {
                LinearRow balance;
                for (int g = 0; g < G; ++g) {
                    const auto& gen = inst.generators[g];
                    alpha(g, i) = prog.add_variable(-kInf, kInf, 0.0);
                    z(g, i) = prog.add_variable(0.0, kInf, dur / N);
                    prog.add_inequality(
                        {{{alpha(g, i), gen.down_adjust_cost}, {z(g, i), -1.0}}, 0.0});
                    prog.add_inequality(
                        {{{alpha(g, i), -gen.up_adjust_cost}, {z(g, i), -1.0}}, 0.0});
                    // -r_up <= alpha <= r_dn with reserves as variables
                    prog.add_inequality({{{alpha(g, i), -1.0},
                                          {m.up_reserve[s](t, g), -1.0}},
                                         0.0});
                    prog.add_inequality({{{alpha(g, i), 1.0},
                                          {m.down_reserve[s](t, g), -1.0}},
                                         0.0});
                    balance.coeffs.emplace_back(alpha(g, i), 1.0);
                }
                wv(i) = prog.add_variable(0.0, kInf, dur * inst.costs.wind_curtail_cost / N);
                lv(i) = prog.add_variable(0.0, kInf, dur * inst.costs.load_shed_cost / N);
                balance.coeffs.emplace_back(wv(i), 1.0);
                balance.coeffs.emplace_back(lv(i), -1.0);
                for (int w = 0; w < W; ++w)
                    balance.coeffs.emplace_back(
                        m.x[w], -(train.at(s, t, w, i) - forecast.at(s, t, w)));
                balance.rhs = 0.0;
                prog.add_equality(std::move(balance));
            }
            m.adjust.push_back(std::move(alpha));
            m.adjust_cost.push_back(std::move(z));
            m.curtail.push_back(std::move(wv));
            m.shed.push_back(std::move(lv));
        }
    }

    std::set<std::array<int, 3>> seen;
    for (const auto& tup : active) seen.insert({tup.s, tup.t, tup.l});
    for (const auto& key : seen) add_cvar_rows(m, key[0], key[1], key[2], CvarForm::defaulted);
    return m;
}

AssembledModel assemble_master(const PlanningInstance& inst, const SampleTensor& train,
                               const ForecastTable& forecast, const AmbiguitySpec& spec,
                               const std::vector<LineTuple>& active) {
    AssembledModel m = assemble_first_stage(inst, train, forecast, spec);
    m.master = true;
    for (int s = 0; s < inst.num_scenarios(); ++s)
        for (int t = 0; t < inst.num_periods(); ++t)
            m.q(s, t) = m.program.add_variable(0.0, kInf,
                                               inst.scenarios.duration_hours[s]);
    std::set<std::array<int, 3>> seen;
    for (const auto& tup : active) seen.insert({tup.s, tup.t, tup.l});
    for (const auto& key : seen) add_cvar_rows(m, key[0], key[1], key[2], CvarForm::defaulted);
    return m;
}

Schedule AssembledModel::read_schedule(const VectorXd& primal) const {
    Schedule sched;
    for (size_t s = 0; s < power.size(); ++s) {
        const MatrixXi& p = power[s];
        MatrixXd pv(p.rows(), p.cols()), ruv(p.rows(), p.cols()), rdv(p.rows(), p.cols());
        for (int t = 0; t < p.rows(); ++t)
            for (int g = 0; g < p.cols(); ++g) {
                pv(t, g) = primal(p(t, g));
                ruv(t, g) = primal(up_reserve[s](t, g));
                rdv(t, g) = primal(down_reserve[s](t, g));
            }
        sched.power.push_back(std::move(pv));
        sched.up_reserve.push_back(std::move(ruv));
        sched.down_reserve.push_back(std::move(rdv));
    }
    return sched;
}

VectorXd AssembledModel::read_plan(const VectorXd& primal) const {
    VectorXd plan(x.size());
    for (size_t w = 0; w < x.size(); ++w) plan(w) = std::round(primal(x[w]));
    return plan;
}

}  // namespace windplan
