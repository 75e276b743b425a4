#include "windplan/instance.hpp"

#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace windplan {

using nlohmann::json;

ValidationReport validate_instance(const PlanningInstance& inst) {
    ValidationReport report;
    auto add = [&report](const std::string& msg) { report.violations.push_back(msg); };

    const int G = inst.num_generators();
    const int W = inst.num_sites();
    const auto& grid = inst.scenarios;
    const int D = grid.loads.empty() ? 0 : static_cast<int>(grid.loads[0].cols());

    if (G == 0) add("instance has no generators");

    for (const auto& g : inst.generators) {
        if (g.p_min > g.p_max)
            add("generator " + g.id + ": P_min > P_max");
        if (g.cost_a < 0) add("generator " + g.id + ": negative quadratic cost coefficient");
        if (g.ramp_up < 0 || g.ramp_down < 0) add("generator " + g.id + ": negative ramp limit");
        if (g.up_reserve_cost < 0 || g.down_reserve_cost < 0)
            add("generator " + g.id + ": negative reserve cost");
        if (g.up_adjust_cost < 0 || g.down_adjust_cost < 0)
            add("generator " + g.id + ": negative adjustment cost");
    }

    for (const auto& l : inst.lines) {
        if (l.capacity <= 0) add("line " + l.id + ": capacity must be positive");
        if (l.ptdf_gen.size() != G)
            add("line " + l.id + ": PTDF generator row has " +
                std::to_string(l.ptdf_gen.size()) + " entries, expected " + std::to_string(G));
        if (l.ptdf_wind.size() != W)
            add("line " + l.id + ": PTDF wind row has " +
                std::to_string(l.ptdf_wind.size()) + " entries, expected " + std::to_string(W));
        if (l.ptdf_load.size() != D)
            add("line " + l.id + ": PTDF load row has " +
                std::to_string(l.ptdf_load.size()) + " entries, expected " + std::to_string(D));
    }

    for (const auto& w : inst.wind_sites) {
        if (w.unit_cost < 0) add("wind site " + w.id + ": negative investment cost");
        if (w.max_turbines < 0) add("wind site " + w.id + ": negative turbine cap");
    }

    if (grid.num_scenarios < 1 || grid.num_periods < 1)
        add("scenario grid: S and T must be >= 1");
    if (static_cast<int>(grid.duration_hours.size()) != grid.num_scenarios)
        add("scenario grid: duration table size mismatch");
    for (double d : grid.duration_hours)
        if (d <= 0) add("scenario grid: nonpositive scenario duration");
    if (static_cast<int>(grid.loads.size()) != grid.num_scenarios) {
        add("scenario grid: load table scenario count mismatch");
    } else {
        for (int s = 0; s < grid.num_scenarios; ++s) {
            if (grid.loads[s].rows() != grid.num_periods)
                add("scenario grid: load table period count mismatch in scenario " +
                    std::to_string(s));
            if ((grid.loads[s].array() < 0).any())
                add("scenario grid: negative load in scenario " + std::to_string(s));
        }
    }

    if (inst.costs.wind_curtail_cost < 0 || inst.costs.load_shed_cost < 0)
        add("costs: negative curtailment or shedding cost");
    if (inst.costs.eps_risk <= 0 || inst.costs.eps_risk >= 1)
        add("costs: eps_risk must lie in (0,1)");

    // Feasibility sanity: installed thermal capacity must cover the peak load.
    double total_pmax = 0;
    for (const auto& g : inst.generators) total_pmax += g.p_max;
    double peak = 0;
    for (const auto& m : grid.loads)
        if (m.size() > 0) peak = std::max(peak, m.rowwise().sum().maxCoeff());
    if (!inst.generators.empty() && total_pmax < peak)
        add("total generator capacity " + std::to_string(total_pmax) +
            " below peak load " + std::to_string(peak));

    return report;
}

Eigen::MatrixXd compute_ptdf(int num_buses, const std::vector<Branch>& branches,
                             int slack_bus) {
    const int n = num_buses;
    const int m = static_cast<int>(branches.size());
    if (slack_bus < 0 || slack_bus >= n)
        throw std::invalid_argument("slack bus out of range");

    // Connectivity check.
    std::vector<std::vector<int>> adj(n);
    for (const auto& br : branches) {
        adj[br.from].push_back(br.to);
        adj[br.to].push_back(br.from);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(slack_bus);
    seen[slack_bus] = 1;
    int reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                q.push(v);
            }
    }
    if (reached != n) throw std::invalid_argument("network is disconnected");

    Eigen::MatrixXd b_bus = Eigen::MatrixXd::Zero(n, n);
    for (const auto& br : branches) {
        b_bus(br.from, br.from) += br.susceptance;
        b_bus(br.to, br.to) += br.susceptance;
        b_bus(br.from, br.to) -= br.susceptance;
        b_bus(br.to, br.from) -= br.susceptance;
    }

    // Reduced system without the slack row/column.
    std::vector<int> keep;
    keep.reserve(n - 1);
    for (int i = 0; i < n; ++i)
        if (i != slack_bus) keep.push_back(i);
    Eigen::MatrixXd b_red(n - 1, n - 1);
    for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j) b_red(i, j) = b_bus(keep[i], keep[j]);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(b_red);
    if (!lu.isInvertible())
        throw std::invalid_argument("reduced susceptance matrix is singular");
    Eigen::MatrixXd theta_red = lu.inverse();

    // Angles per unit injection: theta = B_red^{-1} e_bus (0 at slack).
    Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(m, n);
    for (int j = 0; j < n - 1; ++j) {
        int bus = keep[j];
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n - 1; ++i) theta(keep[i]) = theta_red(i, j);
        for (int k = 0; k < m; ++k) {
            const auto& br = branches[k];
            ptdf(k, bus) = br.susceptance * (theta(br.from) - theta(br.to));
        }
    }
    return ptdf;
}

namespace {

Eigen::VectorXd vec_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

json vec_to_json(const Eigen::VectorXd& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

}  // namespace

PlanningInstance load_instance_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    json j;
    in >> j;

    PlanningInstance inst;
    for (const auto& jg : j.at("generators")) {
        ThermalGenerator g;
        g.id = jg.at("id").get<std::string>();
        g.cost_a = jg.at("a").get<double>();
        g.cost_b = jg.at("b").get<double>();
        g.cost_c = jg.at("c").get<double>();
        g.p_min = jg.at("P_min").get<double>();
        g.p_max = jg.at("P_max").get<double>();
        g.ramp_up = jg.at("RU").get<double>();
        g.ramp_down = jg.at("RD").get<double>();
        g.up_reserve_cost = jg.at("UR").get<double>();
        g.down_reserve_cost = jg.at("DR").get<double>();
        g.up_adjust_cost = jg.at("UA").get<double>();
        g.down_adjust_cost = jg.at("DA").get<double>();
        inst.generators.push_back(std::move(g));
    }
    for (const auto& jl : j.at("lines")) {
        TransmissionLine l;
        l.id = jl.at("id").get<std::string>();
        l.capacity = jl.at("capacity").get<double>();
        l.ptdf_gen = vec_from_json(jl.at("ptdf_gen"));
        l.ptdf_wind = vec_from_json(jl.at("ptdf_wind"));
        l.ptdf_load = vec_from_json(jl.at("ptdf_load"));
        inst.lines.push_back(std::move(l));
    }
    for (const auto& jw : j.at("wind_sites")) {
        WindSite w;
        w.id = jw.at("id").get<std::string>();
        w.unit_cost = jw.at("c_w").get<double>();
        w.max_turbines = jw.at("x_max").get<int>();
        inst.wind_sites.push_back(std::move(w));
    }
    const auto& js = j.at("scenarios");
    auto& grid = inst.scenarios;
    grid.num_scenarios = js.at("S").get<int>();
    grid.num_periods = js.at("T").get<int>();
    grid.duration_hours = js.at("delta").get<std::vector<double>>();
    for (const auto& jm : js.at("loads")) {
        // loads[s] is a T x D nested array
        Eigen::MatrixXd m(jm.size(), jm.empty() ? 0 : jm[0].size());
        for (size_t t = 0; t < jm.size(); ++t)
            for (size_t d = 0; d < jm[t].size(); ++d) m(t, d) = jm[t][d].get<double>();
        grid.loads.push_back(std::move(m));
    }
    const auto& jc = j.at("costs");
    inst.costs.wind_curtail_cost = jc.at("WC").get<double>();
    inst.costs.load_shed_cost = jc.at("LS").get<double>();
    inst.costs.eps_risk = jc.at("eps_risk").get<double>();
    return inst;
}

void save_instance_json(const PlanningInstance& inst, const std::string& path) {
    json j;
    j["generators"] = json::array();
    for (const auto& g : inst.generators)
        j["generators"].push_back({{"id", g.id},
                                   {"a", g.cost_a},
                                   {"b", g.cost_b},
                                   {"c", g.cost_c},
                                   {"P_min", g.p_min},
                                   {"P_max", g.p_max},
                                   {"RU", g.ramp_up},
                                   {"RD", g.ramp_down},
                                   {"UR", g.up_reserve_cost},
                                   {"DR", g.down_reserve_cost},
                                   {"UA", g.up_adjust_cost},
                                   {"DA", g.down_adjust_cost}});
    j["lines"] = json::array();
    for (const auto& l : inst.lines)
        j["lines"].push_back({{"id", l.id},
                              {"capacity", l.capacity},
                              {"ptdf_gen", vec_to_json(l.ptdf_gen)},
                              {"ptdf_wind", vec_to_json(l.ptdf_wind)},
                              {"ptdf_load", vec_to_json(l.ptdf_load)}});
    j["wind_sites"] = json::array();
    for (const auto& w : inst.wind_sites)
        j["wind_sites"].push_back(
            {{"id", w.id}, {"c_w", w.unit_cost}, {"x_max", w.max_turbines}});
    json js;
    js["S"] = inst.scenarios.num_scenarios;
    js["T"] = inst.scenarios.num_periods;
    js["delta"] = inst.scenarios.duration_hours;
    js["loads"] = json::array();
    for (const auto& m : inst.scenarios.loads) {
        json jm = json::array();
        for (int t = 0; t < m.rows(); ++t) {
            json jt = json::array();
            for (int d = 0; d < m.cols(); ++d) jt.push_back(m(t, d));
            jm.push_back(jt);
        }
        js["loads"].push_back(jm);
    }
    j["scenarios"] = js;
    j["costs"] = {{"WC", inst.costs.wind_curtail_cost},
                  {"LS", inst.costs.load_shed_cost},
                  {"eps_risk", inst.costs.eps_risk}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write instance file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace windplan
