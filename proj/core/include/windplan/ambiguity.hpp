#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "windplan/sampling.hpp"

namespace windplan {

enum class RadiusMode {
    full_covariance,  // DDROc
    diagonal,         // DDROv
    norm_only,        // NDRO
    empirical,        // EO, radius identically zero
};

/// Radius mode plus the multipliers for the objective regularizer and the
/// per-line CVaR rows. Scalar kappa broadcasts; tables override it.
struct MomentTable;

struct AmbiguitySpec {
    RadiusMode mode = RadiusMode::full_covariance;
    double kappa = 0.0;
    std::optional<Eigen::MatrixXd> kappa_table;       // S x T
    std::optional<std::vector<Eigen::MatrixXd>> kappa_line_table;  // [l] -> S x T
    int wasserstein_order = 1;  // metadata
    // Moments to use instead of the training-sample estimates, e.g. a cached
    // table or the true covariance of a synthetic generator.
    std::shared_ptr<const MomentTable> moments_override;

    double kappa_objective(int s, int t) const {
        if (mode == RadiusMode::empirical) return 0.0;
        return kappa_table ? (*kappa_table)(s, t) : kappa;
    }
    double kappa_for_line(int s, int t, int l) const {
        if (mode == RadiusMode::empirical) return 0.0;
        if (kappa_line_table) return (*kappa_line_table)[l](s, t);
        return kappa_objective(s, t);
    }
};

/// Per-(s,t) sample mean and covariance.
struct MomentTable {
    std::vector<Eigen::VectorXd> mean;        // [s*T+t]
    std::vector<Eigen::MatrixXd> covariance;  // [s*T+t], symmetric PSD
    int T = 1;

    const Eigen::MatrixXd& cov(int s, int t) const { return covariance[s * T + t]; }
    const Eigen::VectorXd& mu(int s, int t) const { return mean[s * T + t]; }
};

/// Unbiased (divisor N-1) mean and covariance of one (s,t) block.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sample_covariance(const SampleTensor& train,
                                                              int s, int t);

MomentTable compute_moments(const SampleTensor& train);

/// Moments the given spec asks to solve with: the override when present,
/// otherwise the training-sample estimates.
MomentTable moments_for(const AmbiguitySpec& spec, const SampleTensor& train);

double radius(const Eigen::VectorXd& x, const Eigen::VectorXd& a,
              const Eigen::MatrixXd& covariance, double kappa, RadiusMode mode);

/// Concentration-based radius with user-supplied constants.
double theoretical_radius(const Eigen::VectorXd& x, const Eigen::VectorXd& a,
                          const Eigen::MatrixXd& covariance, int n_samples, double beta,
                          double p, double c1, double c2);

/// Largest |gamma| over the dual feasible region of the adjustment problem;
/// evaluated by LP and always equal to max(WC, LS).
double dual_bound_phi(const std::vector<double>& up_adjust_costs,
                      const std::vector<double>& down_adjust_costs, double wind_curtail_cost,
                      double load_shed_cost);

/// Factor R with R^T R = clip_psd(covariance), suited for the cone row
/// ||R (a.x)|| <= theta. Diagonal and norm-only modes use diagonal factors.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& covariance, RadiusMode mode);

}  // namespace windplan
