// Command-line front end. Subcommands: gen-data, solve, evaluate, cv, compare.
//
// Exit codes: 0 success, 2 usage or input error, 3 infeasible model,
// 4 iteration limit. Every command is deterministic given (flags, files,
// --seed); all randomness is drawn from the master seed through named
// substreams so that e.g. changing the cv split does not perturb the data.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "windplan/evaluate.hpp"
#include "windplan/instance.hpp"

using namespace windplan;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Independent 64-bit stream per (seed, name): FNV-1a over the name folded
// into the seed, then a splitmix finalizer.
uint64_t substream(uint64_t seed, const std::string& name) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

RadiusMode parse_method(const std::string& name) {
    if (name == "eo") return RadiusMode::empirical;
    if (name == "ndro") return RadiusMode::norm_only;
    if (name == "ddrov") return RadiusMode::diagonal;
    if (name == "ddro" || name == "ddroc") return RadiusMode::full_covariance;
    throw UsageError("unknown method '" + name + "' (want eo|ndro|ddrov|ddro|ddroc)");
}

Algo parse_algo(const std::string& name) {
    if (name == "extensive") return Algo::extensive;
    if (name == "cg") return Algo::cg;
    if (name == "cg-l") return Algo::cg_l;
    throw UsageError("unknown algo '" + name + "' (want extensive|cg|cg-l)");
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw UsageError("bad number '" + tok + "' in list '" + csv + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// Broadcast a one-element list across W sites.
VectorXd per_site(const std::vector<double>& values, int w, const char* flag) {
    if (values.size() == 1) return VectorXd::Constant(w, values[0]);
    if (static_cast<int>(values.size()) != w)
        throw UsageError(std::string(flag) + " needs 1 or " + std::to_string(w) + " values");
    return Eigen::Map<const VectorXd>(values.data(), w);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << content;
}

json schedule_to_json(const Schedule& sched) {
    auto dump = [](const std::vector<MatrixXd>& tables) {
        json arr = json::array();
        for (const auto& m : tables) {
            json rows = json::array();
            for (int t = 0; t < m.rows(); ++t) {
                json row = json::array();
                for (int g = 0; g < m.cols(); ++g) row.push_back(m(t, g));
                rows.push_back(std::move(row));
            }
            arr.push_back(std::move(rows));
        }
        return arr;
    };
    return {{"power", dump(sched.power)},
            {"up_reserve", dump(sched.up_reserve)},
            {"down_reserve", dump(sched.down_reserve)}};
}

Schedule schedule_from_json(const json& j) {
    auto load = [](const json& arr) {
        std::vector<MatrixXd> tables;
        for (const auto& rows : arr) {
            MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
            for (int t = 0; t < m.rows(); ++t)
                for (int g = 0; g < m.cols(); ++g) m(t, g) = rows[t][g].get<double>();
            tables.push_back(std::move(m));
        }
        return tables;
    };
    Schedule sched;
    sched.power = load(j.at("power"));
    sched.up_reserve = load(j.at("up_reserve"));
    sched.down_reserve = load(j.at("down_reserve"));
    return sched;
}

json forecast_to_json(const ForecastTable& f) {
    json values = json::array();
    for (int s = 0; s < f.num_scenarios(); ++s)
        for (int t = 0; t < f.num_periods(); ++t)
            for (int w = 0; w < f.num_sites(); ++w) values.push_back(f.at(s, t, w));
    return {{"scenarios", f.num_scenarios()},
            {"periods", f.num_periods()},
            {"sites", f.num_sites()},
            {"values", std::move(values)}};
}

ForecastTable forecast_from_json(const json& j) {
    ForecastTable f(j.at("scenarios"), j.at("periods"), j.at("sites"));
    size_t k = 0;
    const json& values = j.at("values");
    for (int s = 0; s < f.num_scenarios(); ++s)
        for (int t = 0; t < f.num_periods(); ++t)
            for (int w = 0; w < f.num_sites(); ++w) f.at(s, t, w) = values[k++].get<double>();
    return f;
}

// ---------------------------------------------------------------------------

struct GenDataConfig {
    bool weibull = false;
    std::string copula_path;
    int sites = 1, n = 60, scenarios = 1, periods = 1, iterations = 5;
    uint64_t seed = 1;
    std::string mean = "1.2", variance = "0.09";
    double train_fraction = -1.0;
    std::string out = "samples.csv";
    std::string forecast_out, test_out;
};

int cmd_gen_data(const GenDataConfig& cfg) {
    if (cfg.weibull == !cfg.copula_path.empty())
        throw UsageError("choose exactly one of --weibull and --copula");
    SampleTensor samples;
    if (cfg.weibull) {
        VectorXd mean = per_site(parse_doubles(cfg.mean), cfg.sites, "--mean");
        VectorXd var = per_site(parse_doubles(cfg.variance), cfg.sites, "--variance");
        MomentField field;
        for (int s = 0; s < cfg.scenarios; ++s) {
            field.mean.push_back(mean.transpose().replicate(cfg.periods, 1));
            field.variance.push_back(var.transpose().replicate(cfg.periods, 1));
        }
        samples = sample_weibull_field(field, cfg.n, substream(cfg.seed, "data"));
    } else {
        SampleTensor raw = load_samples_csv(cfg.copula_path);
        CopulaModel model = fit_copula_generator(raw.block(0, 0));
        MatrixXd gen = generate_copula_samples(model, cfg.n, cfg.iterations,
                                               substream(cfg.seed, "data"));
        samples = SampleTensor(1, 1, model.num_sites(), cfg.n);
        samples.set_block(0, 0, gen);
    }
    if (cfg.train_fraction > 0.0) {
        if (cfg.test_out.empty()) throw UsageError("--train-fraction needs --test-out");
        auto [train, test] =
            split_samples(samples, cfg.train_fraction, substream(cfg.seed, "split"));
        save_samples_csv(train, cfg.out);
        save_samples_csv(test, cfg.test_out);
    } else {
        save_samples_csv(samples, cfg.out);
    }
    if (!cfg.forecast_out.empty())
        save_forecast_csv(forecast_from_samples(samples), cfg.forecast_out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SolveConfig {
    std::string instance, samples, forecast;
    std::string method = "ddro", algo = "cg-l";
    double kappa = -1.0;
    double capacity = -1.0;
    double nu = 1e-6;
    std::string out = "solution.json", log_path, dump_model;
};

int cmd_solve(const SolveConfig& cfg) {
    AmbiguitySpec spec;
    spec.mode = parse_method(cfg.method);
    if (spec.mode == RadiusMode::empirical && cfg.kappa >= 0.0)
        throw UsageError("--method eo forbids --kappa");
    if (spec.mode != RadiusMode::empirical)
        spec.kappa = cfg.kappa >= 0.0 ? cfg.kappa : 0.0;

    PlanningInstance inst = load_instance_json(cfg.instance);
    SampleTensor train = load_samples_csv(cfg.samples);
    ForecastTable forecast = cfg.forecast.empty() ? forecast_from_samples(train)
                                                  : load_forecast_csv(cfg.forecast);
    SolveOptions opts;
    opts.nu = cfg.nu;
    opts.fixed_total_capacity = cfg.capacity;
    opts.dump_model_path = cfg.dump_model;
    SolveLog log;
    PlanSolution sol = solve(inst, train, forecast, spec, parse_algo(cfg.algo), opts, &log);

    json doc = {{"method", cfg.method},
                {"kappa", spec.kappa},
                {"algo", cfg.algo},
                {"x", std::vector<double>(sol.x.begin(), sol.x.end())},
                {"schedule", schedule_to_json(sol.schedule)},
                {"forecast", forecast_to_json(forecast)},
                {"objective", sol.objective},
                {"investment", sol.investment},
                {"generation", sol.generation},
                {"reserve", sol.reserve},
                {"regularizer", sol.regularizer},
                {"recourse_mean", sol.recourse_mean}};
    write_text(cfg.out, doc.dump(2) + "\n");
    if (!cfg.log_path.empty()) write_text(cfg.log_path, log.to_text());
    std::printf("objective %.6f investment %.6f generation %.6f reserve %.6f "
                "regularizer %.6f recourse %.6f\n",
                sol.objective, sol.investment, sol.generation, sol.reserve,
                sol.regularizer, sol.recourse_mean);
    return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateConfig {
    std::string instance, solution, test, out;
};

int cmd_evaluate(const EvaluateConfig& cfg) {
    PlanningInstance inst = load_instance_json(cfg.instance);
    SampleTensor test = load_samples_csv(cfg.test);
    std::ifstream in(cfg.solution);
    if (!in) throw UsageError("cannot read " + cfg.solution);
    json doc = json::parse(in);
    VectorXd x = Eigen::Map<const VectorXd>(doc.at("x").get<std::vector<double>>().data(),
                                            doc.at("x").size());
    Schedule sched = schedule_from_json(doc.at("schedule"));
    ForecastTable forecast = forecast_from_json(doc.at("forecast"));
    double risk = risk_management_cost(inst, x, sched, test, forecast);
    double smoothing = mean_smoothing_variance(x, test);
    std::string report = "metric,value\nrisk_management_cost," + std::to_string(risk) +
                         "\nsmoothing_variance," + std::to_string(smoothing) + "\n";
    if (!cfg.out.empty()) write_text(cfg.out, report);
    std::printf("risk_management_cost %.6f smoothing_variance %.6f\n", risk, smoothing);
    return 0;
}

// ---------------------------------------------------------------------------

struct CvConfig {
    std::string instance, samples, validation;
    std::string method = "ddrov", algo = "cg", grid = "0,0.25,0.5,1";
    double split = 0.75;
    uint64_t seed = 1;
    std::string out;
};

int cmd_cv(const CvConfig& cfg) {
    AmbiguitySpec base;
    base.mode = parse_method(cfg.method);
    if (base.mode == RadiusMode::empirical)
        throw UsageError("--method eo has no radius to cross-validate");
    PlanningInstance inst = load_instance_json(cfg.instance);
    SampleTensor all = load_samples_csv(cfg.samples);
    SampleTensor train, validation;
    if (cfg.validation.empty()) {
        std::tie(train, validation) =
            split_samples(all, cfg.split, substream(cfg.seed, "cv"));
    } else {
        train = std::move(all);
        validation = load_samples_csv(cfg.validation);
    }
    ForecastTable forecast = forecast_from_samples(train);
    auto result = cross_validate_kappa(inst, train, validation, forecast, base,
                                       parse_doubles(cfg.grid), parse_algo(cfg.algo));
    std::string report = "kappa,validation_cost\n";
    for (const auto& [kappa, score] : result.scores)
        report += std::to_string(kappa) + "," + std::to_string(score) + "\n";
    report += "best," + std::to_string(result.best_kappa) + "\n";
    if (!cfg.out.empty()) write_text(cfg.out, report);
    std::printf("best kappa %.6f\n", result.best_kappa);
    return 0;
}

// ---------------------------------------------------------------------------

struct CompareConfig {
    std::string instance;
    std::string methods = "ddrov,ndro,eo";
    double capacity = 0.0, kappa = 0.25;
    int seeds = 20, n_train = 60, n_test = 3000;
    uint64_t seed = 1;
    std::string mean = "1.2", variance = "0.09", algo = "cg";
    std::string out = "report.csv";
};

int cmd_compare(const CompareConfig& cfg) {
    PlanningInstance inst = load_instance_json(cfg.instance);
    const int W = inst.num_sites();
    VectorXd mean = per_site(parse_doubles(cfg.mean), W, "--mean");
    VectorXd var = per_site(parse_doubles(cfg.variance), W, "--variance");
    MomentField field;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
        field.mean.push_back(mean.transpose().replicate(inst.num_periods(), 1));
        field.variance.push_back(var.transpose().replicate(inst.num_periods(), 1));
    }
    const uint64_t data_seed = substream(cfg.seed, "data");
    auto sampler = [&](uint64_t s) {
        return std::pair{sample_weibull_field(field, cfg.n_train, data_seed + 2 * s),
                         sample_weibull_field(field, cfg.n_test, data_seed + 2 * s + 1)};
    };
    // Methods take the shared --kappa; "name=value" overrides it per method.
    std::vector<MethodSpec> methods;
    size_t pos = 0;
    while (pos <= cfg.methods.size()) {
        size_t comma = cfg.methods.find(',', pos);
        std::string tok =
            cfg.methods.substr(pos, comma == std::string::npos ? comma : comma - pos);
        MethodSpec m;
        size_t eq = tok.find('=');
        m.name = tok.substr(0, eq);
        m.mode = parse_method(m.name);
        if (m.mode != RadiusMode::empirical)
            m.kappa = eq == std::string::npos ? cfg.kappa : std::stod(tok.substr(eq + 1));
        methods.push_back(std::move(m));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    std::vector<uint64_t> seeds;
    for (int s = 1; s <= cfg.seeds; ++s) seeds.push_back(s);
    auto report = compare_methods(inst, sampler, methods, cfg.capacity, seeds,
                                  parse_algo(cfg.algo));
    write_text(cfg.out, report.to_csv());
    std::printf("%zu cells (%zu methods x %d seeds) -> %s\n", report.cells.size(),
                methods.size(), cfg.seeds, cfg.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wind farm planning under decision-dependent ambiguity"};
    app.require_subcommand(1);

    GenDataConfig gd;
    auto* gen = app.add_subcommand("gen-data", "generate sample and forecast files");
    gen->add_flag("--weibull", gd.weibull, "independent Weibull sites from moments");
    gen->add_option("--copula", gd.copula_path, "fit a correlated generator to this file");
    gen->add_option("--sites", gd.sites, "number of wind sites (weibull)");
    gen->add_option("--n", gd.n, "samples per (scenario, period)");
    gen->add_option("--scenarios", gd.scenarios);
    gen->add_option("--periods", gd.periods);
    gen->add_option("--iterations", gd.iterations, "moment-matching rounds (copula)");
    gen->add_option("--seed", gd.seed);
    gen->add_option("--mean", gd.mean, "per-site means, scalar or comma list");
    gen->add_option("--variance", gd.variance, "per-site variances, scalar or comma list");
    gen->add_option("--train-fraction", gd.train_fraction, "also split into train/test");
    gen->add_option("--out", gd.out, "sample file path");
    gen->add_option("--test-out", gd.test_out, "test split path");
    gen->add_option("--forecast-out", gd.forecast_out, "forecast file path");

    SolveConfig sc;
    auto* solve_cmd = app.add_subcommand("solve", "solve the planning model");
    solve_cmd->add_option("--instance", sc.instance)->required();
    solve_cmd->add_option("--samples", sc.samples)->required();
    solve_cmd->add_option("--forecast", sc.forecast, "defaults to the sample means");
    solve_cmd->add_option("--method", sc.method, "eo|ndro|ddrov|ddro|ddroc");
    solve_cmd->add_option("--kappa", sc.kappa, "radius multiplier");
    solve_cmd->add_option("--algo", sc.algo, "extensive|cg|cg-l");
    solve_cmd->add_option("--capacity", sc.capacity, "pin the total turbine count");
    solve_cmd->add_option("--nu", sc.nu, "decomposition relative gap");
    solve_cmd->add_option("--out", sc.out, "solution file path");
    solve_cmd->add_option("--log", sc.log_path, "iteration log path");
    solve_cmd->add_option("--dump-model", sc.dump_model, "write the program text here");

    EvaluateConfig ec;
    auto* eval_cmd = app.add_subcommand("evaluate", "score a solution out of sample");
    eval_cmd->add_option("--instance", ec.instance)->required();
    eval_cmd->add_option("--solution", ec.solution)->required();
    eval_cmd->add_option("--test", ec.test)->required();
    eval_cmd->add_option("--out", ec.out, "report file path");

    CvConfig cc;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validate the radius multiplier");
    cv_cmd->add_option("--instance", cc.instance)->required();
    cv_cmd->add_option("--samples", cc.samples)->required();
    cv_cmd->add_option("--validation", cc.validation, "explicit validation file");
    cv_cmd->add_option("--split", cc.split, "train fraction when splitting --samples");
    cv_cmd->add_option("--grid", cc.grid, "comma list of kappa values");
    cv_cmd->add_option("--method", cc.method);
    cv_cmd->add_option("--algo", cc.algo);
    cv_cmd->add_option("--seed", cc.seed);
    cv_cmd->add_option("--out", cc.out, "report file path");

    CompareConfig mc;
    auto* cmp_cmd = app.add_subcommand("compare", "out-of-sample method comparison");
    cmp_cmd->add_option("--instance", mc.instance)->required();
    cmp_cmd->add_option("--methods", mc.methods, "comma list, optional name=kappa");
    cmp_cmd->add_option("--capacity", mc.capacity, "shared total turbine count")->required();
    cmp_cmd->add_option("--kappa", mc.kappa, "shared radius multiplier");
    cmp_cmd->add_option("--seeds", mc.seeds, "number of replication seeds");
    cmp_cmd->add_option("--n-train", mc.n_train);
    cmp_cmd->add_option("--n-test", mc.n_test);
    cmp_cmd->add_option("--seed", mc.seed);
    cmp_cmd->add_option("--mean", mc.mean, "per-site means, scalar or comma list");
    cmp_cmd->add_option("--variance", mc.variance, "per-site variances");
    cmp_cmd->add_option("--algo", mc.algo);
    cmp_cmd->add_option("--out", mc.out, "report file path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gd);
        if (solve_cmd->parsed()) return cmd_solve(sc);
        if (eval_cmd->parsed()) return cmd_evaluate(ec);
        if (cv_cmd->parsed()) return cmd_cv(cc);
        if (cmp_cmd->parsed()) return cmd_compare(mc);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::string what = e.what();
        if (what.find("infeasible") != std::string::npos) return 3;
        if (what.find("converge") != std::string::npos ||
            what.find("iteration") != std::string::npos ||
            what.find("node limit") != std::string::npos)
            return 4;
        return 2;
    }
    return 2;
}
