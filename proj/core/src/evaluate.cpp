#include "windplan/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace windplan {

using Eigen::VectorXd;

namespace {

VectorXd gen_field(const PlanningInstance& inst, double ThermalGenerator::* field) {
    VectorXd v(inst.num_generators());
    for (int g = 0; g < inst.num_generators(); ++g) v(g) = inst.generators[g].*field;
    return v;
}

}  // namespace

double risk_management_cost(const PlanningInstance& inst, const VectorXd& x,
                            const Schedule& schedule, const SampleTensor& test,
                            const ForecastTable& forecast) {
    const VectorXd ua = gen_field(inst, &ThermalGenerator::up_adjust_cost);
    const VectorXd da = gen_field(inst, &ThermalGenerator::down_adjust_cost);
    double total = 0.0;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
        const double dur = inst.scenarios.duration_hours[s];
        for (int t = 0; t < inst.num_periods(); ++t) {
            for (int g = 0; g < inst.num_generators(); ++g)
                total += dur * (inst.generators[g].up_reserve_cost *
                                    schedule.up_reserve[s](t, g) +
                                inst.generators[g].down_reserve_cost *
                                    schedule.down_reserve[s](t, g));
            auto rec = empirical_recourse_expectation(
                x, test, forecast, s, t, schedule.up_reserve[s].row(t).transpose(),
                schedule.down_reserve[s].row(t).transpose(), ua, da,
                inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
            total += dur * rec.mean;
        }
    }
    return total;
}

double smoothing_variance(const VectorXd& x, const SampleTensor& test, int s, int t) {
    const int n = test.num_samples();
    if (n < 2) throw std::invalid_argument("smoothing variance needs at least 2 samples");
    VectorXd agg = test.block(s, t) * x;
    double mean = agg.mean();
    return (agg.array() - mean).square().sum() / (n - 1);
}

double mean_smoothing_variance(const VectorXd& x, const SampleTensor& test) {
    double acc = 0.0;
    int count = 0;
    for (int s = 0; s < test.num_scenarios(); ++s)
        for (int t = 0; t < test.num_periods(); ++t, ++count)
            acc += smoothing_variance(x, test, s, t);
    return acc / count;
}

CrossValidationResult cross_validate_kappa(const PlanningInstance& inst,
                                           const SampleTensor& train,
                                           const SampleTensor& validation,
                                           const ForecastTable& forecast,
                                           const AmbiguitySpec& base_spec,
                                           const std::vector<double>& grid, Algo algo,
                                           const SolveOptions& opts) {
    if (grid.empty()) throw std::invalid_argument("empty cross-validation grid");
    CrossValidationResult result;
    double best_score = std::numeric_limits<double>::infinity();
    bool first = true;
    for (double kappa : grid) {
        if (kappa < 0) throw std::invalid_argument("kappa must be nonnegative");
        AmbiguitySpec spec = base_spec;
        spec.kappa = kappa;
        spec.kappa_table.reset();
        spec.kappa_line_table.reset();
        PlanSolution sol = solve(inst, train, forecast, spec, algo, opts);
        double score = risk_management_cost(inst, sol.x, sol.schedule, validation, forecast);
        result.scores.emplace_back(kappa, score);
        if (first || score < best_score ||
            (score == best_score && kappa < result.best_kappa)) {
            best_score = score;
            result.best_kappa = kappa;
            first = false;
        }
    }
    return result;
}

std::string EvaluationReport::to_csv() const {
    std::ostringstream os;
    os << "method,seed,risk_cost,smoothing_variance,objective,investment,generation,x\n";
    os.precision(12);
    for (const auto& c : cells) {
        os << c.method << "," << c.seed << "," << c.risk_cost << "," << c.smoothing << ","
           << c.objective << "," << c.investment << "," << c.generation << ",";
        for (int w = 0; w < c.x.size(); ++w) os << (w ? ";" : "") << c.x(w);
        os << "\n";
    }
    return os.str();
}

EvaluationReport compare_methods(
    const PlanningInstance& inst,
    const std::function<std::pair<SampleTensor, SampleTensor>(uint64_t)>& sampler,
    const std::vector<MethodSpec>& methods, double total_capacity,
    const std::vector<uint64_t>& seeds, Algo algo, const SolveOptions& opts) {
    double max_cap = 0.0;
    for (const auto& site : inst.wind_sites) max_cap += site.max_turbines;
    if (total_capacity > max_cap)
        throw std::invalid_argument("requested capacity exceeds the site limits");

    EvaluationReport report;
    for (uint64_t seed : seeds) {
        auto [train, test] = sampler(seed);
        ForecastTable forecast = forecast_from_samples(train);
        for (const auto& method : methods) {
            AmbiguitySpec spec;
            spec.mode = method.mode;
            spec.kappa = method.kappa;
            SolveOptions run = opts;
            run.fixed_total_capacity = total_capacity;
            PlanSolution sol = solve(inst, train, forecast, spec, algo, run);
            MethodCell cell;
            cell.method = method.name;
            cell.seed = seed;
            cell.x = sol.x;
            cell.objective = sol.objective;
            cell.investment = sol.investment;
            cell.generation = sol.generation;
            cell.risk_cost =
                risk_management_cost(inst, sol.x, sol.schedule, test, forecast);
            cell.smoothing = mean_smoothing_variance(sol.x, test);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

double guarantee_coverage(const PlanningInstance& inst,
                          const std::function<SampleTensor(int, uint64_t)>& sampler,
                          double kappa, RadiusMode mode, int trials, int n_train,
                          int n_eval, uint64_t seed, const SolveOptions& opts) {
    if (trials < 1) throw std::invalid_argument("coverage needs at least one trial");
    const VectorXd ua = gen_field(inst, &ThermalGenerator::up_adjust_cost);
    const VectorXd da = gen_field(inst, &ThermalGenerator::down_adjust_cost);
    const double phi = std::max(inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
    const VectorXd ones = VectorXd::Ones(inst.num_sites());

    SampleTensor eval = sampler(n_eval, seed * 1000003ull);
    int hits = 0;
    for (int trial = 0; trial < trials; ++trial) {
        SampleTensor train = sampler(n_train, seed + trial + 1);
        ForecastTable forecast = forecast_from_samples(train);
        AmbiguitySpec spec;
        spec.mode = mode;
        spec.kappa = kappa;
        PlanSolution sol = solve(inst, train, forecast, spec, Algo::extensive, opts);
        MomentTable moments = moments_for(spec, train);

        bool covered = true;
        for (int s = 0; s < inst.num_scenarios() && covered; ++s)
            for (int t = 0; t < inst.num_periods() && covered; ++t) {
                auto in_sample = empirical_recourse_expectation(
                    sol.x, train, forecast, s, t,
                    sol.schedule.up_reserve[s].row(t).transpose(),
                    sol.schedule.down_reserve[s].row(t).transpose(), ua, da,
                    inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
                double certificate =
                    in_sample.mean + phi * radius(sol.x, ones, moments.cov(s, t),
                                                  spec.kappa_objective(s, t), mode);
                auto truth = empirical_recourse_expectation(
                    sol.x, eval, forecast, s, t,
                    sol.schedule.up_reserve[s].row(t).transpose(),
                    sol.schedule.down_reserve[s].row(t).transpose(), ua, da,
                    inst.costs.wind_curtail_cost, inst.costs.load_shed_cost);
                if (certificate < truth.mean) covered = false;
            }
        if (covered) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

}  // namespace windplan
