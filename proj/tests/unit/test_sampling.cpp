#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "windplan/sampling.hpp"

using namespace windplan;
using Eigen::MatrixXd;
using Eigen::VectorXd;

#ifndef WINDPLAN_DATA_DIR
#define WINDPLAN_DATA_DIR "data"
#endif

TEST_CASE("weibull params exponential special cases") {
    auto [k1, l1] = weibull_params_from_moments(1.0, 1.0);
    CHECK(k1 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-8));
    auto [k2, l2] = weibull_params_from_moments(2.0, 4.0);
    CHECK(k2 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(l2 == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("weibull params at cv 0.25") {
    auto [k, lambda] = weibull_params_from_moments(1.2, 0.09);
    CHECK(k == doctest::Approx(4.54).epsilon(5e-3));
    CHECK(lambda * std::tgamma(1.0 + 1.0 / k) == doctest::Approx(1.2).epsilon(1e-8));
}

TEST_CASE("weibull params invert analytic moments on a grid") {
    for (double k = 0.5; k <= 8.0 + 1e-9; k += 1.5)
        for (double lambda = 0.1; lambda <= 10.0 + 1e-9; lambda += 2.475) {
            double g1 = std::tgamma(1.0 + 1.0 / k);
            double g2 = std::tgamma(1.0 + 2.0 / k);
            double mean = lambda * g1;
            double var = lambda * lambda * (g2 - g1 * g1);
            auto [kk, ll] = weibull_params_from_moments(mean, var);
            CHECK(kk == doctest::Approx(k).epsilon(1e-7));
            CHECK(ll == doctest::Approx(lambda).epsilon(1e-7));
        }
}

TEST_CASE("weibull params reject degenerate variance") {
    CHECK_THROWS(weibull_params_from_moments(1.0, 0.0));
}

TEST_CASE("weibull field matches requested moments in the large sample limit") {
    MomentField field;
    field.mean = {MatrixXd::Constant(1, 1, 1.2)};
    field.variance = {MatrixXd::Constant(1, 1, 0.09)};
    SampleTensor t = sample_weibull_field(field, 10000, 11);
    VectorXd col = t.block(0, 0).col(0);
    double mean = col.mean();
    double var = (col.array() - mean).square().sum() / (col.size() - 1);
    CHECK(mean == doctest::Approx(1.2).epsilon(0.02 / 1.2));
    CHECK(var == doctest::Approx(0.09).epsilon(0.01 / 0.09));
    CHECK(col.minCoeff() >= 0.0);
}

TEST_CASE("weibull field is deterministic per seed") {
    MomentField field;
    field.mean = {MatrixXd::Constant(2, 3, 1.1)};
    field.variance = {MatrixXd::Constant(2, 3, 0.08)};
    CHECK(sample_weibull_field(field, 50, 7) == sample_weibull_field(field, 50, 7));
    CHECK(sample_weibull_field(field, 50, 7) != sample_weibull_field(field, 50, 8));
}

TEST_CASE("copula fit keeps independent columns independent") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = 4000;
    MatrixXd raw(n, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) raw(i, j) = unif(rng);
    CopulaModel model = fit_copula_generator(raw);
    double se = 3.0 / std::sqrt(double(n));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(model.gauss_correlation(i, j)) < se);
}

TEST_CASE("copula fit sees comonotone pairs as correlation one") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MatrixXd raw(500, 2);
    for (int i = 0; i < 500; ++i) {
        raw(i, 0) = unif(rng);
        raw(i, 1) = 2.0 * raw(i, 0);
    }
    CopulaModel model = fit_copula_generator(raw);
    CHECK(model.gauss_correlation(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("shipped four site dataset reproduces the reference correlation") {
    SampleTensor t = load_samples_csv(std::string(WINDPLAN_DATA_DIR) +
                                      "/copula_fixture.csv");
    REQUIRE(t.num_sites() == 4);
    CopulaModel model = fit_copula_generator(t.block(0, 0));
    MatrixXd expected(4, 4);
    expected << 1, 0.3125, 0.2991, 0.4763,
        0.3125, 1, 0.2688, 0.3865,
        0.2991, 0.2688, 1, 0.4822,
        0.4763, 0.3865, 0.4822, 1;
    CHECK((model.gauss_correlation - expected).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("copula generation hits the target moments and stays nonnegative") {
    SampleTensor t = load_samples_csv(std::string(WINDPLAN_DATA_DIR) +
                                      "/copula_fixture.csv");
    CopulaModel model = fit_copula_generator(t.block(0, 0));
    MatrixXd gen = generate_copula_samples(model, 3000, 5, 21);
    CHECK(gen.minCoeff() >= 0.0);
    VectorXd mu = gen.colwise().mean();
    MatrixXd centered = gen.rowwise() - mu.transpose();
    MatrixXd cov = centered.transpose() * centered / double(gen.rows() - 1);
    CHECK((cov - model.target_covariance).norm() < 0.10 * model.target_covariance.norm());
    // Determinism.
    CHECK(generate_copula_samples(model, 100, 5, 5) ==
          generate_copula_samples(model, 100, 5, 5));
}

TEST_CASE("copula moment loop contracts over the first iterations") {
    SampleTensor t = load_samples_csv(std::string(WINDPLAN_DATA_DIR) +
                                      "/copula_fixture.csv");
    CopulaModel model = fit_copula_generator(t.block(0, 0));
    double prev = std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 5; ++iters) {
        MatrixXd gen = generate_copula_samples(model, 2000, iters, 77);
        VectorXd mu = gen.colwise().mean();
        MatrixXd centered = gen.rowwise() - mu.transpose();
        MatrixXd cov = centered.transpose() * centered / double(gen.rows() - 1);
        double dist = (cov - model.target_covariance).norm();
        CHECK(dist <= prev + 1e-6);
        prev = dist;
    }
}

TEST_CASE("forecast is the per cell sample mean") {
    SampleTensor t(1, 1, 1, 2);
    t.at(0, 0, 0, 0) = 0.0;
    t.at(0, 0, 0, 1) = 2.0;
    ForecastTable f = forecast_from_samples(t);
    CHECK(f.at(0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("forecast is permutation invariant") {
    SampleTensor t = testing::weibull_block(2, 9, 31);
    SampleTensor perm = t;
    for (int w = 0; w < 2; ++w)
        for (int i = 0; i < 9; ++i) perm.at(0, 0, w, i) = t.at(0, 0, w, 8 - i);
    ForecastTable a = forecast_from_samples(t);
    ForecastTable b = forecast_from_samples(perm);
    CHECK(a.at(0, 0, 0) == doctest::Approx(b.at(0, 0, 0)).epsilon(1e-12));
    CHECK(a.at(0, 0, 1) == doctest::Approx(b.at(0, 0, 1)).epsilon(1e-12));
}

TEST_CASE("split is a deterministic disjoint partition") {
    SampleTensor t = testing::weibull_block(2, 10, 5);
    auto [train, test] = split_samples(t, 0.6, 9);
    CHECK(train.num_samples() == 6);
    CHECK(test.num_samples() == 4);
    auto [train2, test2] = split_samples(t, 0.6, 9);
    CHECK(train == train2);
    CHECK(test == test2);
    // Union of the two parts recovers the original multiset per (s,t,w).
    for (int w = 0; w < 2; ++w) {
        std::vector<double> all, parts;
        for (int i = 0; i < 10; ++i) all.push_back(t.at(0, 0, w, i));
        for (int i = 0; i < 6; ++i) parts.push_back(train.at(0, 0, w, i));
        for (int i = 0; i < 4; ++i) parts.push_back(test.at(0, 0, w, i));
        std::sort(all.begin(), all.end());
        std::sort(parts.begin(), parts.end());
        CHECK(all == parts);
    }
}

TEST_CASE("sample csv round trip") {
    SampleTensor t = testing::weibull_block(3, 7, 13);
    auto path = std::filesystem::temp_directory_path() / "windplan_samples_rt.csv";
    save_samples_csv(t, path.string());
    SampleTensor back = load_samples_csv(path.string());
    std::filesystem::remove(path);
    REQUIRE(back.num_sites() == 3);
    REQUIRE(back.num_samples() == 7);
    for (int w = 0; w < 3; ++w)
        for (int i = 0; i < 7; ++i)
            CHECK(back.at(0, 0, w, i) == doctest::Approx(t.at(0, 0, w, i)).epsilon(1e-15));
}
