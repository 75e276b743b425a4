#pragma once

#include <cstdint>
#include <random>

#include "windplan/instance.hpp"
#include "windplan/sampling.hpp"

// Shared fixture builders for the unit and acceptance tests.
namespace windplan::testing {

// 14-bus network with the standard 20-branch topology. Generators sit at
// buses 1, 2, 3, 6, 8 and wind sites at buses 5, 9, 14 (capped at W).
// line_scale multiplies every line capacity; 1.0 is comfortably loose,
// values near 0.5 make a handful of lines bind.
PlanningInstance ieee14_instance(int num_sites = 3, double line_scale = 1.0);

// Line-free instance with one generator and W sites, used by the coverage
// and smoothing experiments where the network plays no role.
PlanningInstance single_generator_instance(int num_sites, double load = 10.0);

// Small random instance within the IEEE-14 size envelope. Lines are taken
// from the 14-bus network with loose capacities so the fixtures stay feasible.
PlanningInstance random_instance(std::mt19937_64& rng, int max_sites = 3);

// Independent Weibull samples with per-site means/variances drawn from the
// given ranges, S=T=1.
SampleTensor weibull_block(int num_sites, int n_samples, uint64_t seed,
                           double mean_lo = 0.96, double mean_hi = 1.44,
                           double var_lo = 0.0576, double var_hi = 0.1210);

// Correlated nonnegative samples (S=T=1) with the given site correlation,
// lognormal marginals scaled to roughly unit mean.
SampleTensor correlated_block(int num_sites, int n_samples, double correlation,
                              uint64_t seed);

// True second moments of correlated_block for the supplied-covariance runs.
void correlated_block_moments(int num_sites, double correlation,
                              Eigen::VectorXd& mean, Eigen::MatrixXd& covariance);

}  // namespace windplan::testing
