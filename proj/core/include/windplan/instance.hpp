#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace windplan {

/// Thermal unit with quadratic fuel cost a*P^2 + b*P + c.
struct ThermalGenerator {
    std::string id;
    double cost_a = 0.0;  // money/MWh^2 * MW^2 per hour, >= 0
    double cost_b = 0.0;  // money/MWh
    double cost_c = 0.0;  // money/h
    double p_min = 0.0;   // MW
    double p_max = 0.0;   // MW
    double ramp_up = 0.0;    // MW/period
    double ramp_down = 0.0;  // MW/period
    double up_reserve_cost = 0.0;    // money/MW
    double down_reserve_cost = 0.0;  // money/MW
    double up_adjust_cost = 0.0;     // money/MWh
    double down_adjust_cost = 0.0;   // money/MWh
};

/// DC line with shift factors for every generator, wind site and load node.
struct TransmissionLine {
    std::string id;
    double capacity = 0.0;  // MW, > 0
    Eigen::VectorXd ptdf_gen;   // one entry per generator
    Eigen::VectorXd ptdf_wind;  // one entry per wind site
    Eigen::VectorXd ptdf_load;  // one entry per load node
};

struct WindSite {
    std::string id;
    double unit_cost = 0.0;  // money/turbine
    int max_turbines = 0;
};

/// Operating scenarios: loads are deterministic, indexed (s, t, d).
struct ScenarioGrid {
    int num_scenarios = 1;
    int num_periods = 1;
    std::vector<double> duration_hours;          // per scenario
    std::vector<Eigen::MatrixXd> loads;          // [s] -> T x D matrix, MW

    double load(int s, int t, int d) const { return loads[s](t, d); }
    double total_load(int s, int t) const { return loads[s].row(t).sum(); }
};

struct CostParameters {
    double wind_curtail_cost = 0.0;  // money/MWh
    double load_shed_cost = 0.0;     // money/MWh
    double eps_risk = 0.1;           // chance-constraint risk level, (0,1)
};

struct PlanningInstance {
    std::vector<ThermalGenerator> generators;
    std::vector<TransmissionLine> lines;
    std::vector<WindSite> wind_sites;
    ScenarioGrid scenarios;
    CostParameters costs;

    int num_generators() const { return static_cast<int>(generators.size()); }
    int num_lines() const { return static_cast<int>(lines.size()); }
    int num_sites() const { return static_cast<int>(wind_sites.size()); }
    int num_scenarios() const { return scenarios.num_scenarios; }
    int num_periods() const { return scenarios.num_periods; }
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool valid() const { return violations.empty(); }
};

ValidationReport validate_instance(const PlanningInstance& inst);

/// Branch of a DC network, susceptance in p.u.
struct Branch {
    int from = 0;
    int to = 0;
    double susceptance = 0.0;
};

/// PTDF matrix (lines x buses) w.r.t. the given slack bus. Injection at the
/// slack maps to a zero column. Throws std::invalid_argument on a
/// disconnected network or singular reduced susceptance matrix.
Eigen::MatrixXd compute_ptdf(int num_buses, const std::vector<Branch>& branches,
                             int slack_bus);

PlanningInstance load_instance_json(const std::string& path);
void save_instance_json(const PlanningInstance& inst, const std::string& path);

}  // namespace windplan
