#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "windplan/instance.hpp"

using namespace windplan;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("ptdf two bus line") {
    std::vector<Branch> branches = {{0, 1, 5.0}};
    MatrixXd ptdf = compute_ptdf(2, branches, 0);
    // Injection at bus 1 flows toward the slack, against the line orientation.
    CHECK(ptdf(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ptdf(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ptdf slack column is zero") {
    MatrixXd ptdf = compute_ptdf(14, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 3.0},
                                      {1, 3, 1.5}, {3, 4, 1.0}, {4, 5, 1.0}, {5, 0, 1.0},
                                      {5, 6, 2.0}, {6, 7, 1.0}, {7, 8, 1.0}, {8, 0, 1.0},
                                      {8, 9, 1.0}, {9, 10, 1.0}, {10, 11, 1.0},
                                      {11, 12, 1.0}, {12, 13, 1.0}, {13, 0, 1.0}},
                                 0);
    CHECK(ptdf.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ptdf three bus ring splits 2/3 1/3") {
    std::vector<Branch> branches = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}};
    MatrixXd ptdf = compute_ptdf(3, branches, 0);
    CHECK(std::abs(ptdf(0, 1)) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(std::abs(ptdf(1, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(std::abs(ptdf(2, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("ptdf kirchhoff balance on a random network") {
    // Flow computed through the PTDF must balance at every bus for a unit
    // injection/withdrawal pair.
    std::vector<Branch> branches = {{0, 1, 2.0}, {1, 2, 1.5}, {2, 3, 1.0},
                                    {3, 0, 2.5}, {1, 3, 0.7}};
    const int buses = 4;
    MatrixXd ptdf = compute_ptdf(buses, branches, 0);
    for (int inj = 1; inj < buses; ++inj) {
        VectorXd net = VectorXd::Zero(buses);
        net(inj) += 1.0;
        net(0) -= 1.0;
        VectorXd residual = net;
        for (size_t l = 0; l < branches.size(); ++l) {
            double flow = ptdf(static_cast<int>(l), inj);
            residual(branches[l].from) -= flow;
            residual(branches[l].to) += flow;
        }
        CHECK(residual.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("ptdf rejects disconnected networks") {
    CHECK_THROWS_AS(compute_ptdf(4, {{0, 1, 1.0}, {2, 3, 1.0}}, 0), std::invalid_argument);
}

TEST_CASE("validate accepts a well formed instance") {
    PlanningInstance inst = testing::ieee14_instance();
    auto report = validate_instance(inst);
    CHECK(report.valid());
    // Idempotent and side-effect free.
    CHECK(validate_instance(inst).violations == report.violations);
}

TEST_CASE("validate flags pmin above pmax with the generator id") {
    PlanningInstance inst = testing::ieee14_instance();
    inst.generators[2].p_min = inst.generators[2].p_max + 1.0;
    auto report = validate_instance(inst);
    REQUIRE(!report.valid());
    bool named = false;
    for (const auto& v : report.violations)
        if (v.find(inst.generators[2].id) != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("validate flags ptdf dimension mismatch") {
    PlanningInstance inst = testing::ieee14_instance();
    inst.lines[0].ptdf_gen.conservativeResize(inst.num_generators() - 1);
    CHECK(!validate_instance(inst).valid());
}

TEST_CASE("instance json round trip") {
    PlanningInstance inst = testing::ieee14_instance();
    auto path = std::filesystem::temp_directory_path() / "windplan_inst_rt.json";
    save_instance_json(inst, path.string());
    PlanningInstance back = load_instance_json(path.string());
    std::filesystem::remove(path);

    REQUIRE(back.num_generators() == inst.num_generators());
    REQUIRE(back.num_lines() == inst.num_lines());
    REQUIRE(back.num_sites() == inst.num_sites());
    CHECK(back.generators[1].cost_b == inst.generators[1].cost_b);
    CHECK(back.lines[3].capacity == inst.lines[3].capacity);
    CHECK((back.lines[3].ptdf_wind - inst.lines[3].ptdf_wind).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(back.scenarios.loads[0] == inst.scenarios.loads[0]);
    CHECK(back.costs.load_shed_cost == inst.costs.load_shed_cost);
}
