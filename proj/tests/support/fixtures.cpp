#include "fixtures.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace windplan::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Standard 14-bus branch list, reactances in p.u.
const std::vector<Branch> kIeee14Branches = {
    {0, 1, 1.0 / 0.05917},  {0, 4, 1.0 / 0.22304},  {1, 2, 1.0 / 0.19797},
    {1, 3, 1.0 / 0.17632},  {1, 4, 1.0 / 0.17388},  {2, 3, 1.0 / 0.17103},
    {3, 4, 1.0 / 0.04211},  {3, 6, 1.0 / 0.20912},  {3, 8, 1.0 / 0.55618},
    {4, 5, 1.0 / 0.25202},  {5, 10, 1.0 / 0.19890}, {5, 11, 1.0 / 0.25581},
    {5, 12, 1.0 / 0.13027}, {6, 7, 1.0 / 0.17615},  {6, 8, 1.0 / 0.11001},
    {8, 9, 1.0 / 0.08450},  {8, 13, 1.0 / 0.27038}, {9, 10, 1.0 / 0.19207},
    {11, 12, 1.0 / 0.19988}, {12, 13, 1.0 / 0.34802}};

const std::vector<int> kGenBuses = {0, 1, 2, 5, 7};
const std::vector<int> kWindBuses = {4, 8, 13};
const std::vector<int> kLoadBuses = {1, 2, 3, 4, 5, 8, 9, 10, 11, 12, 13};

ThermalGenerator make_generator(const std::string& id, double p_max, double cost_b) {
    ThermalGenerator g;
    g.id = id;
    g.cost_a = 0.0;
    g.cost_b = cost_b;
    g.cost_c = 5.0;
    g.p_min = 0.0;
    g.p_max = p_max;
    g.ramp_up = p_max;
    g.ramp_down = p_max;
    g.up_reserve_cost = 2.0;
    g.down_reserve_cost = 2.0;
    g.up_adjust_cost = cost_b * 1.5;
    g.down_adjust_cost = cost_b * 0.5;
    return g;
}

}  // namespace

PlanningInstance ieee14_instance(int num_sites, double line_scale) {
    PlanningInstance inst;
    const int buses = 14;
    MatrixXd ptdf = compute_ptdf(buses, kIeee14Branches, 0);

    for (size_t k = 0; k < kGenBuses.size(); ++k)
        inst.generators.push_back(
            make_generator("g" + std::to_string(k), 60.0, 20.0 + 4.0 * double(k)));

    for (int w = 0; w < num_sites; ++w) {
        WindSite site;
        site.id = "w" + std::to_string(w);
        site.unit_cost = 50.0;
        site.max_turbines = 8;
        inst.wind_sites.push_back(site);
    }

    const int D = static_cast<int>(kLoadBuses.size());
    inst.scenarios.num_scenarios = 1;
    inst.scenarios.num_periods = 1;
    inst.scenarios.duration_hours = {1.0};
    MatrixXd loads(1, D);
    for (int d = 0; d < D; ++d) loads(0, d) = 100.0 / D;
    inst.scenarios.loads = {loads};

    for (size_t l = 0; l < kIeee14Branches.size(); ++l) {
        TransmissionLine line;
        line.id = "l" + std::to_string(l);
        line.capacity = 60.0 * line_scale;
        line.ptdf_gen.resize(inst.num_generators());
        for (int g = 0; g < inst.num_generators(); ++g)
            line.ptdf_gen(g) = ptdf(static_cast<int>(l), kGenBuses[g]);
        line.ptdf_wind.resize(num_sites);
        for (int w = 0; w < num_sites; ++w)
            line.ptdf_wind(w) = ptdf(static_cast<int>(l), kWindBuses[w % kWindBuses.size()]);
        line.ptdf_load.resize(D);
        for (int d = 0; d < D; ++d)
            line.ptdf_load(d) = ptdf(static_cast<int>(l), kLoadBuses[d]);
        inst.lines.push_back(line);
    }

    inst.costs.wind_curtail_cost = 40.0;
    inst.costs.load_shed_cost = 200.0;
    inst.costs.eps_risk = 0.1;
    return inst;
}

PlanningInstance single_generator_instance(int num_sites, double load) {
    PlanningInstance inst;
    inst.generators.push_back(make_generator("g0", 4.0 * load, 25.0));
    for (int w = 0; w < num_sites; ++w) {
        WindSite site;
        site.id = "w" + std::to_string(w);
        site.unit_cost = 10.0;
        site.max_turbines = 8;
        inst.wind_sites.push_back(site);
    }
    inst.scenarios.num_scenarios = 1;
    inst.scenarios.num_periods = 1;
    inst.scenarios.duration_hours = {1.0};
    inst.scenarios.loads = {MatrixXd::Constant(1, 1, load)};
    inst.costs.wind_curtail_cost = 40.0;
    inst.costs.load_shed_cost = 200.0;
    inst.costs.eps_risk = 0.1;
    return inst;
}

PlanningInstance random_instance(std::mt19937_64& rng, int max_sites) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    const int W = 1 + static_cast<int>(rng() % max_sites);
    PlanningInstance inst = ieee14_instance(W, uniform(1.2, 2.0));

    const int G = 2 + static_cast<int>(rng() % 3);
    inst.generators.resize(G);
    for (auto& line : inst.lines) line.ptdf_gen.conservativeResize(G);
    for (int g = 0; g < G; ++g) {
        inst.generators[g].cost_b = uniform(15.0, 35.0);
        inst.generators[g].p_max = uniform(50.0, 90.0);
        inst.generators[g].ramp_up = inst.generators[g].p_max;
        inst.generators[g].ramp_down = inst.generators[g].p_max;
        inst.generators[g].up_adjust_cost = inst.generators[g].cost_b * uniform(1.2, 1.8);
        inst.generators[g].down_adjust_cost = inst.generators[g].cost_b * uniform(0.3, 0.8);
        inst.generators[g].up_reserve_cost = uniform(1.0, 4.0);
        inst.generators[g].down_reserve_cost = uniform(1.0, 4.0);
    }

    const int T = 1 + static_cast<int>(rng() % 2);
    inst.scenarios.num_periods = T;
    const int D = static_cast<int>(inst.lines[0].ptdf_load.size());
    MatrixXd loads(T, D);
    for (int t = 0; t < T; ++t)
        for (int d = 0; d < D; ++d) loads(t, d) = uniform(60.0, 110.0) / D;
    inst.scenarios.loads = {loads};

    for (auto& site : inst.wind_sites) {
        site.unit_cost = uniform(20.0, 80.0);
        site.max_turbines = 2 + static_cast<int>(rng() % 7);
    }
    inst.costs.wind_curtail_cost = uniform(20.0, 60.0);
    inst.costs.load_shed_cost = uniform(120.0, 300.0);
    inst.costs.eps_risk = 0.1;
    return inst;
}

SampleTensor weibull_block(int num_sites, int n_samples, uint64_t seed, double mean_lo,
                           double mean_hi, double var_lo, double var_hi) {
    std::mt19937_64 rng(seed * 2654435761ull + 17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MomentField field;
    field.mean = {MatrixXd(1, num_sites)};
    field.variance = {MatrixXd(1, num_sites)};
    for (int w = 0; w < num_sites; ++w) {
        field.mean[0](0, w) = mean_lo + (mean_hi - mean_lo) * unit(rng);
        field.variance[0](0, w) = var_lo + (var_hi - var_lo) * unit(rng);
    }
    return sample_weibull_field(field, n_samples, seed);
}

namespace {
constexpr double kLogSigma = 0.4;
}

SampleTensor correlated_block(int num_sites, int n_samples, double correlation,
                              uint64_t seed) {
    MatrixXd corr = MatrixXd::Constant(num_sites, num_sites, correlation);
    corr.diagonal().setOnes();
    MatrixXd chol = corr.llt().matrixL();
    std::mt19937_64 rng(seed * 6364136223846793005ull + 1442695040888963407ull);
    std::normal_distribution<double> normal(0.0, 1.0);
    SampleTensor out(1, 1, num_sites, n_samples);
    for (int i = 0; i < n_samples; ++i) {
        VectorXd z(num_sites);
        for (int w = 0; w < num_sites; ++w) z(w) = normal(rng);
        VectorXd corr_z = chol * z;
        for (int w = 0; w < num_sites; ++w)
            out.at(0, 0, w, i) =
                std::exp(kLogSigma * corr_z(w) - 0.5 * kLogSigma * kLogSigma);
    }
    return out;
}

void correlated_block_moments(int num_sites, double correlation, VectorXd& mean,
                              MatrixXd& covariance) {
    const double s2 = kLogSigma * kLogSigma;
    mean = VectorXd::Ones(num_sites);
    covariance.resize(num_sites, num_sites);
    for (int i = 0; i < num_sites; ++i)
        for (int j = 0; j < num_sites; ++j) {
            double c = i == j ? 1.0 : correlation;
            covariance(i, j) = std::exp(s2 * c) - 1.0;
        }
}

}  // namespace windplan::testing
