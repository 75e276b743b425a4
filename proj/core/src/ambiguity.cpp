#include "windplan/ambiguity.hpp"

#include <cmath>
#include <stdexcept>

#include "windplan/conic/solver.hpp"

namespace windplan {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::pair<VectorXd, MatrixXd> sample_covariance(const SampleTensor& train, int s, int t) {
    MatrixXd block = train.block(s, t);
    const int n = static_cast<int>(block.rows());
    const int w = static_cast<int>(block.cols());
    VectorXd mu = block.colwise().mean();
    MatrixXd cov = MatrixXd::Zero(w, w);
    if (n > 1) {
        MatrixXd centered = block.rowwise() - mu.transpose();
        cov = centered.transpose() * centered / double(n - 1);
        cov = ((cov + cov.transpose()) / 2.0).eval();
    }
    return {mu, cov};
}

MomentTable moments_for(const AmbiguitySpec& spec, const SampleTensor& train) {
    if (spec.moments_override) return *spec.moments_override;
    return compute_moments(train);
}

MomentTable compute_moments(const SampleTensor& train) {
    MomentTable table;
    table.T = train.num_periods();
    for (int s = 0; s < train.num_scenarios(); ++s)
        for (int t = 0; t < train.num_periods(); ++t) {
            auto [mu, cov] = sample_covariance(train, s, t);
            table.mean.push_back(std::move(mu));
            table.covariance.push_back(std::move(cov));
        }
    return table;
}

double radius(const VectorXd& x, const VectorXd& a, const MatrixXd& covariance, double kappa,
              RadiusMode mode) {
    switch (mode) {
        case RadiusMode::empirical:
            return 0.0;
        case RadiusMode::norm_only:
            return kappa * x.norm();
        case RadiusMode::diagonal: {
            VectorXd ax = a.cwiseProduct(x);
            return kappa * std::sqrt(covariance.diagonal().dot(ax.cwiseAbs2()));
        }
        case RadiusMode::full_covariance: {
            VectorXd ax = a.cwiseProduct(x);
            double q = ax.dot(covariance * ax);
            return kappa * std::sqrt(std::max(q, 0.0));
        }
    }
    return 0.0;
}

double theoretical_radius(const VectorXd& x, const VectorXd& a, const MatrixXd& covariance,
                          int n_samples, double beta, double p, double c1, double c2) {
    if (p < 1.0 || p >= 2.0)
        throw std::invalid_argument("theoretical radius requires 1 <= p < 2");
    if (n_samples < 1) throw std::invalid_argument("theoretical radius requires samples");
    if (beta <= 0.0 || beta >= 1.0)
        throw std::invalid_argument("confidence level beta must lie in (0,1)");
    VectorXd ax = a.cwiseProduct(x);
    double q = std::max(ax.dot(covariance * ax), 0.0);
    double n = static_cast<double>(n_samples);
    return std::sqrt(3.0 * q / n) * std::log(c1 / beta) +
           std::pow(c2 / (2.0 - p), 1.0 / p) * std::sqrt(q / n);
}

double dual_bound_phi(const std::vector<double>& up_adjust_costs,
                      const std::vector<double>& down_adjust_costs, double wind_curtail_cost,
                      double load_shed_cost) {
    const int g = static_cast<int>(up_adjust_costs.size());
    if (down_adjust_costs.size() != static_cast<size_t>(g))
        throw std::invalid_argument("adjustment cost vectors differ in length");

    double best = 0.0;
    for (double sign : {1.0, -1.0}) {
        // max sign*gamma over the dual feasible region of the adjustment
        // recourse; solved as min -sign*gamma.
        conic::ConicProgram lp;
        int gamma = lp.add_variable(-wind_curtail_cost, load_shed_cost, -sign);
        int tau_up = lp.add_variable(0.0, conic::kInf);
        int tau_dn = lp.add_variable(0.0, conic::kInf);
        lp.add_equality({{{tau_up, 1.0}, {tau_dn, 1.0}}, 1.0});
        for (int i = 0; i < g; ++i) {
            int mu_up = lp.add_variable(0.0, conic::kInf);
            int mu_dn = lp.add_variable(0.0, conic::kInf);
            lp.add_equality({{{gamma, 1.0},
                              {tau_up, down_adjust_costs[i]},
                              {tau_dn, -up_adjust_costs[i]},
                              {mu_up, -1.0},
                              {mu_dn, 1.0}},
                             0.0});
        }
        auto sol = conic::solve_conic(lp);
        if (sol.status != conic::SolveStatus::optimal)
            throw std::runtime_error("adjustment dual bound LP did not solve");
        best = std::max(best, -sol.objective);
    }
    return best;
}

MatrixXd covariance_factor(const MatrixXd& covariance, RadiusMode mode) {
    const int w = static_cast<int>(covariance.rows());
    switch (mode) {
        case RadiusMode::empirical:
            return MatrixXd::Zero(w, w);
        case RadiusMode::norm_only:
            return MatrixXd::Identity(w, w);
        case RadiusMode::diagonal:
            return covariance.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        case RadiusMode::full_covariance: {
            MatrixXd sym = (covariance + covariance.transpose()) / 2.0;
            Eigen::LLT<MatrixXd> llt(sym);
            if (llt.info() == Eigen::Success) return llt.matrixU();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
            VectorXd ev = es.eigenvalues();
            double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
            if (ev.minCoeff() < -1e-8 * scale)
                throw std::invalid_argument("covariance is not positive semidefinite");
            return ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
        }
    }
    return MatrixXd::Zero(w, w);
}

}  // namespace windplan
