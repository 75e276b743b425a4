#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace windplan {

/// Wind power resource observations, indexed (scenario, period, site, sample).
/// All values are nonnegative and the sample count N is uniform across (s,t).
class SampleTensor {
  public:
    SampleTensor() = default;
    SampleTensor(int S, int T, int W, int N)
        : S_(S), T_(T), W_(W), N_(N), data_(static_cast<size_t>(S) * T * W * N, 0.0) {}

    int num_scenarios() const { return S_; }
    int num_periods() const { return T_; }
    int num_sites() const { return W_; }
    int num_samples() const { return N_; }

    double& at(int s, int t, int w, int i) { return data_[index(s, t, w, i)]; }
    double at(int s, int t, int w, int i) const { return data_[index(s, t, w, i)]; }

    /// N x W matrix of samples for one (s,t) block.
    Eigen::MatrixXd block(int s, int t) const;
    void set_block(int s, int t, const Eigen::MatrixXd& values);

    bool operator==(const SampleTensor& other) const = default;

  private:
    size_t index(int s, int t, int w, int i) const {
        return (((static_cast<size_t>(s) * T_ + t) * W_ + w) * N_ + i);
    }
    int S_ = 0, T_ = 0, W_ = 0, N_ = 0;
    std::vector<double> data_;
};

/// Point forecasts per (scenario, period, site).
class ForecastTable {
  public:
    ForecastTable() = default;
    ForecastTable(int S, int T, int W)
        : S_(S), T_(T), W_(W), data_(static_cast<size_t>(S) * T * W, 0.0) {}

    int num_scenarios() const { return S_; }
    int num_periods() const { return T_; }
    int num_sites() const { return W_; }

    double& at(int s, int t, int w) { return data_[(static_cast<size_t>(s) * T_ + t) * W_ + w]; }
    double at(int s, int t, int w) const {
        return data_[(static_cast<size_t>(s) * T_ + t) * W_ + w];
    }
    Eigen::VectorXd row(int s, int t) const;

  private:
    int S_ = 0, T_ = 0, W_ = 0;
    std::vector<double> data_;
};

/// Weibull (shape k, scale lambda) matching the given mean and variance.
/// Residuals of both moment equations are below 1e-8 relative.
std::pair<double, double> weibull_params_from_moments(double mean, double variance);

struct MomentField {
    // S x T x W tables of per-site moments.
    std::vector<Eigen::MatrixXd> mean;      // [s] -> T x W
    std::vector<Eigen::MatrixXd> variance;  // [s] -> T x W
};

SampleTensor sample_weibull_field(const MomentField& field, int N, uint64_t seed);

/// Empirical-quantile marginals plus a Gaussian correlation structure,
/// with the raw-data moments kept as matching targets.
struct CopulaModel {
    std::vector<Eigen::VectorXd> marginal_values;  // sorted raw samples per site
    Eigen::MatrixXd gauss_correlation;             // of the Gaussianized data
    Eigen::VectorXd target_mean;
    Eigen::MatrixXd target_covariance;

    int num_sites() const { return static_cast<int>(marginal_values.size()); }
};

CopulaModel fit_copula_generator(const Eigen::MatrixXd& raw_samples);

/// N x W nonnegative samples reproducing the model's marginals and target
/// moments via the iterative truncate / re-moment loop.
Eigen::MatrixXd generate_copula_samples(const CopulaModel& model, int N, int iterations,
                                        uint64_t seed);

ForecastTable forecast_from_samples(const SampleTensor& train);

std::pair<SampleTensor, SampleTensor> split_samples(const SampleTensor& tensor,
                                                    double train_fraction, uint64_t seed);

SampleTensor load_samples_csv(const std::string& path);
void save_samples_csv(const SampleTensor& tensor, const std::string& path);
ForecastTable load_forecast_csv(const std::string& path);
void save_forecast_csv(const ForecastTable& table, const std::string& path);

}  // namespace windplan
