#include "windplan/decomp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace windplan {

using Eigen::VectorXd;

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

VectorXd gen_field(const PlanningInstance& inst, double ThermalGenerator::* field) {
    VectorXd v(inst.num_generators());
    for (int g = 0; g < inst.num_generators(); ++g) v(g) = inst.generators[g].*field;
    return v;
}

std::vector<LineTuple> all_tuples(const PlanningInstance& inst) {
    std::vector<LineTuple> tuples;
    for (int s = 0; s < inst.num_scenarios(); ++s)
        for (int t = 0; t < inst.num_periods(); ++t)
            for (int l = 0; l < inst.num_lines(); ++l)
                for (int k = 0; k < 2; ++k) tuples.push_back({s, t, l, k});
    return tuples;
}

void apply_capacity_pin(AssembledModel& model, const SolveOptions& opts) {
    if (opts.fixed_total_capacity < 0) return;
    conic::LinearRow row;
    for (int idx : model.x) row.coeffs.emplace_back(idx, 1.0);
    row.rhs = opts.fixed_total_capacity;
    model.program.add_equality(std::move(row));
}

void maybe_dump(const AssembledModel& model, const SolveOptions& opts) {
    if (opts.dump_model_path.empty()) return;
    std::ofstream out(opts.dump_model_path);
    out << model.program.dump();
}

/// Rounded key of a cut for duplicate suppression.
std::string cut_key(const Cut& cut) {
    std::ostringstream os;
    os << cut.s << "," << cut.t;
    auto put = [&os](double v) { os << "," << std::llround(v * 1e9); };
    for (int i = 0; i < cut.coeff_x.size(); ++i) put(cut.coeff_x(i));
    for (int i = 0; i < cut.coeff_up.size(); ++i) put(cut.coeff_up(i));
    for (int i = 0; i < cut.coeff_dn.size(); ++i) put(cut.coeff_dn(i));
    put(cut.constant);
    return os.str();
}

void add_cut_row(AssembledModel& model, const Cut& cut) {
    conic::LinearRow row;
    for (int w = 0; w < cut.coeff_x.size(); ++w)
        row.coeffs.emplace_back(model.x[w], cut.coeff_x(w));
    for (int g = 0; g < cut.coeff_up.size(); ++g) {
        row.coeffs.emplace_back(model.up_reserve[cut.s](cut.t, g), cut.coeff_up(g));
        row.coeffs.emplace_back(model.down_reserve[cut.s](cut.t, g), cut.coeff_dn(g));
    }
    row.coeffs.emplace_back(model.q(cut.s, cut.t), -1.0);
    row.rhs = -cut.constant;
    model.program.add_inequality(std::move(row));
}

}  // namespace

std::string SolveLog::to_text() const {
    std::ostringstream os;
    for (const auto& e : entries)
        os << e.iter << "," << e.lb << "," << e.ub << "," << e.cuts << "," << e.tuples << ","
           << e.ms << "\n";
    return os.str();
}

Cut build_cut(const PlanningInstance& inst, const SampleTensor& train,
              const ForecastTable& forecast, int s, int t, const RecourseExpectation& rec,
              int iteration) {
    const int W = inst.num_sites(), G = inst.num_generators();
    const int N = static_cast<int>(rec.per_sample.size());
    Cut cut;
    cut.s = s;
    cut.t = t;
    cut.iteration = iteration;
    cut.coeff_x = VectorXd::Zero(W);
    cut.coeff_up = VectorXd::Zero(G);
    cut.coeff_dn = VectorXd::Zero(G);
    for (int i = 0; i < N; ++i) {
        const RecourseSolution& dual = rec.per_sample[i];
        for (int w = 0; w < W; ++w)
            cut.coeff_x(w) -= (train.at(s, t, w, i) - forecast.at(s, t, w)) * dual.gamma / N;
        for (int g = 0; g < G; ++g) {
            cut.coeff_up(g) -= dual.mu_lower(g) / N;
            cut.coeff_dn(g) -= dual.mu_upper(g) / N;
        }
    }
    return cut;
}

PlanSolution evaluate_plan(const PlanningInstance& inst, const SampleTensor& train,
                           const ForecastTable& forecast, const AmbiguitySpec& spec,
                           const VectorXd& x, const Schedule& schedule) {
    PlanSolution sol;
    sol.x = x;
    sol.schedule = schedule;
    for (int w = 0; w < inst.num_sites(); ++w)
        sol.investment += inst.wind_sites[w].unit_cost * x(w);

    MomentTable moments = moments_for(spec, train);
    const VectorXd ua = gen_field(inst, &ThermalGenerator::up_adjust_cost);
    const VectorXd da = gen_field(inst, &ThermalGenerator::down_adjust_cost);
    const double phi = std::max(inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
    const VectorXd ones = VectorXd::Ones(inst.num_sites());

    for (int s = 0; s < inst.num_scenarios(); ++s) {
        const double dur = inst.scenarios.duration_hours[s];
        for (int t = 0; t < inst.num_periods(); ++t) {
            for (int g = 0; g < inst.num_generators(); ++g) {
                const auto& gen = inst.generators[g];
                double p = schedule.power[s](t, g);
                sol.generation += dur * (gen.cost_a * p * p + gen.cost_b * p + gen.cost_c);
                sol.reserve += dur * (gen.up_reserve_cost * schedule.up_reserve[s](t, g) +
                                      gen.down_reserve_cost * schedule.down_reserve[s](t, g));
            }
            sol.regularizer += dur * phi *
                               radius(x, ones, moments.cov(s, t),
                                      spec.kappa_objective(s, t), spec.mode);
            auto rec = empirical_recourse_expectation(
                x, train, forecast, s, t, schedule.up_reserve[s].row(t).transpose(),
                schedule.down_reserve[s].row(t).transpose(), ua, da,
                inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
            sol.recourse_mean += dur * rec.mean;
        }
    }
    sol.objective = sol.investment + sol.generation + sol.reserve + sol.regularizer +
                    sol.recourse_mean;
    return sol;
}

PlanSolution solve_extensive(const PlanningInstance& inst, const SampleTensor& train,
                             const ForecastTable& forecast, const AmbiguitySpec& spec,
                             const SolveOptions& opts, SolveLog* log) {
    auto start = std::chrono::steady_clock::now();
    AssembledModel model =
        assemble_extensive(inst, train, forecast, spec, all_tuples(inst));
    apply_capacity_pin(model, opts);
    maybe_dump(model, opts);
    IntegerSolution mip = branch_and_bound(model.program, opts.solver, opts.bnb);
    if (mip.status == conic::SolveStatus::infeasible)
        throw std::runtime_error("planning model is infeasible");
    if (mip.status != conic::SolveStatus::optimal)
        throw std::runtime_error("planning model solve did not converge");
    PlanSolution sol = evaluate_plan(inst, train, forecast, spec,
                                     model.read_plan(mip.x), model.read_schedule(mip.x));
    if (log)
        log->entries.push_back({0, sol.objective, sol.objective, 0,
                                2 * inst.num_scenarios() * inst.num_periods() *
                                    inst.num_lines(),
                                elapsed_ms(start)});
    return sol;
}

PlanSolution l_shaped(const PlanningInstance& inst, const SampleTensor& train,
                      const ForecastTable& forecast, const AmbiguitySpec& spec,
                      const std::vector<LineTuple>& active, const SolveOptions& opts,
                      SolveLog* log, std::vector<Cut>* cut_pool,
                      const std::vector<std::array<int, 3>>* exact_tuples) {
    auto start = std::chrono::steady_clock::now();
    const int S = inst.num_scenarios(), T = inst.num_periods();
    const VectorXd ua = gen_field(inst, &ThermalGenerator::up_adjust_cost);
    const VectorXd da = gen_field(inst, &ThermalGenerator::down_adjust_cost);

    AssembledModel model = assemble_master(inst, train, forecast, spec, active);
    if (exact_tuples)
        for (const auto& key : *exact_tuples)
            add_cvar_rows(model, key[0], key[1], key[2], CvarForm::exact);
    apply_capacity_pin(model, opts);
    std::set<std::string> seen_cuts;
    std::vector<Cut> local_pool;
    std::vector<Cut>& pool = cut_pool ? *cut_pool : local_pool;
    for (const Cut& cut : pool) {
        add_cut_row(model, cut);
        seen_cuts.insert(cut_key(cut));
    }
    maybe_dump(model, opts);

    double lb = -std::numeric_limits<double>::infinity();
    double ub = std::numeric_limits<double>::infinity();
    PlanSolution best;
    for (int iter = 0; iter < opts.lshaped_max_iter; ++iter) {
        IntegerSolution mip = branch_and_bound(model.program, opts.solver, opts.bnb);
        if (mip.status == conic::SolveStatus::infeasible)
            throw std::runtime_error("master problem is infeasible");
        if (mip.status != conic::SolveStatus::optimal)
            throw std::runtime_error("master problem solve did not converge");
        lb = std::max(lb, mip.objective);
        VectorXd x = model.read_plan(mip.x);
        Schedule sched = model.read_schedule(mip.x);

        double candidate = mip.objective;
        int added = 0;
        for (int s = 0; s < S; ++s) {
            const double dur = inst.scenarios.duration_hours[s];
            for (int t = 0; t < T; ++t) {
                auto rec = empirical_recourse_expectation(
                    x, train, forecast, s, t, sched.up_reserve[s].row(t).transpose(),
                    sched.down_reserve[s].row(t).transpose(), ua, da,
                    inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
                candidate += dur * (rec.mean - mip.x(model.q(s, t)));
                Cut cut = build_cut(inst, train, forecast, s, t, rec, iter);
                if (seen_cuts.insert(cut_key(cut)).second) {
                    add_cut_row(model, cut);
                    pool.push_back(cut);
                    ++added;
                }
            }
        }
        if (candidate < ub) {
            ub = candidate;
            best = evaluate_plan(inst, train, forecast, spec, x, sched);
        }
        if (log)
            log->entries.push_back({iter, lb, ub, static_cast<int>(pool.size()),
                                    static_cast<int>(active.size()), elapsed_ms(start)});
        double gap = (ub - lb) / std::max(std::abs(lb), 1e-9);
        if (gap <= opts.nu || added == 0) return best;
    }
    throw std::runtime_error("cut loop iteration limit exceeded");
}

PlanSolution constraint_generation(const PlanningInstance& inst, const SampleTensor& train,
                                   const ForecastTable& forecast, const AmbiguitySpec& spec,
                                   bool inner_l_shaped, const SolveOptions& opts,
                                   SolveLog* log, std::vector<LineTuple>* active_out) {
    auto start = std::chrono::steady_clock::now();
    MomentTable moments = moments_for(spec, train);
    std::set<LineTuple> active;
    std::set<std::array<int, 3>> exact;  // tuples upgraded to the per-sample form
    std::vector<Cut> cut_pool;

    for (int iter = 0; iter < opts.cg_max_iter; ++iter) {
        std::vector<LineTuple> active_list(active.begin(), active.end());
        PlanSolution sol;
        if (inner_l_shaped) {
            std::vector<std::array<int, 3>> exact_list(exact.begin(), exact.end());
            sol = l_shaped(inst, train, forecast, spec, active_list, opts, nullptr,
                           &cut_pool, &exact_list);
        } else {
            AssembledModel model =
                assemble_extensive(inst, train, forecast, spec, active_list);
            for (const auto& key : exact)
                add_cvar_rows(model, key[0], key[1], key[2], CvarForm::exact);
            apply_capacity_pin(model, opts);
            maybe_dump(model, opts);
            IntegerSolution mip = branch_and_bound(model.program, opts.solver, opts.bnb);
            if (mip.status == conic::SolveStatus::infeasible)
                throw std::runtime_error("planning model is infeasible");
            if (mip.status != conic::SolveStatus::optimal)
                throw std::runtime_error("planning model solve did not converge");
            sol = evaluate_plan(inst, train, forecast, spec, model.read_plan(mip.x),
                                model.read_schedule(mip.x));
        }
        auto violated = line_flow_check(inst, sol.x, sol.schedule, train, moments, spec);
        if (log)
            log->entries.push_back({iter, sol.objective, sol.objective,
                                    static_cast<int>(cut_pool.size()),
                                    static_cast<int>(active.size()), elapsed_ms(start)});
        if (violated.empty()) {
            if (active_out) active_out->assign(active.begin(), active.end());
            return sol;
        }
        bool grew = false;
        for (const auto& tup : violated) {
            if (active.insert(tup).second) {
                grew = true;
            } else if (exact.insert({tup.s, tup.t, tup.l}).second) {
                grew = true;  // repeat violation: tighten to the per-sample form
            }
        }
        if (!grew)
            throw std::runtime_error(
                "line screening keeps failing on fully tightened tuples");
    }
    throw std::runtime_error("constraint generation iteration limit exceeded");
}

PlanSolution solve(const PlanningInstance& inst, const SampleTensor& train,
                   const ForecastTable& forecast, const AmbiguitySpec& spec, Algo algo,
                   const SolveOptions& opts, SolveLog* log) {
    switch (algo) {
        case Algo::extensive:
            return solve_extensive(inst, train, forecast, spec, opts, log);
        case Algo::cg:
            return constraint_generation(inst, train, forecast, spec, false, opts, log);
        case Algo::cg_l:
            return constraint_generation(inst, train, forecast, spec, true, opts, log);
    }
    throw std::invalid_argument("unknown algorithm");
}

}  // namespace windplan
