#include "windplan/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace windplan {

Eigen::MatrixXd SampleTensor::block(int s, int t) const {
    Eigen::MatrixXd m(N_, W_);
    for (int w = 0; w < W_; ++w)
        for (int i = 0; i < N_; ++i) m(i, w) = at(s, t, w, i);
    return m;
}

void SampleTensor::set_block(int s, int t, const Eigen::MatrixXd& values) {
    for (int w = 0; w < W_; ++w)
        for (int i = 0; i < N_; ++i) at(s, t, w, i) = values(i, w);
}

Eigen::VectorXd ForecastTable::row(int s, int t) const {
    Eigen::VectorXd v(W_);
    for (int w = 0; w < W_; ++w) v(w) = at(s, t, w);
    return v;
}

namespace {

double gamma1p(double z) { return std::exp(std::lgamma(1.0 + z)); }

/// Squared coefficient of variation of Weibull(k, .), decreasing in k.
double weibull_cv2(double k) {
    double g1 = std::lgamma(1.0 + 1.0 / k);
    double g2 = std::lgamma(1.0 + 2.0 / k);
    return std::exp(g2 - 2.0 * g1) - 1.0;
}

/// Uniform in (0,1), 53-bit mantissa, endpoint-free.
double next_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

double weibull_draw(std::mt19937_64& rng, double k, double lambda) {
    double u = next_uniform(rng);
    return lambda * std::pow(-std::log1p(-u), 1.0 / k);
}

/// Inverse standard normal CDF (Acklam's approximation + Halley refinement).
double probit(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("probit domain");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley step against the exact CDF.
    double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
    x = x - u / (1 + x * u / 2);
    return x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

constexpr int kQuantileKnots = 1000;

/// Empirical quantile with linear interpolation over sorted values.
double empirical_quantile(const Eigen::VectorXd& sorted, double u) {
    const int n = static_cast<int>(sorted.size());
    if (u <= 0) return sorted(0);
    if (u >= 1) return sorted(n - 1);
    double pos = u * (n - 1);
    int lo = static_cast<int>(std::floor(pos));
    int hi = std::min(lo + 1, n - 1);
    double frac = pos - lo;
    return sorted(lo) * (1 - frac) + sorted(hi) * frac;
}

}  // namespace

std::pair<double, double> weibull_params_from_moments(double mean, double variance) {
    if (mean <= 0 || variance <= 0)
        throw std::invalid_argument("weibull moments require mean > 0 and variance > 0");
    const double cv2 = variance / (mean * mean);
    double lo = 0.05, hi = 600.0;
    if (cv2 >= weibull_cv2(lo) || cv2 <= weibull_cv2(hi))
        throw std::invalid_argument("coefficient of variation outside bracketed Weibull range");
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (weibull_cv2(mid) > cv2)
            lo = mid;
        else
            hi = mid;
    }
    double k = 0.5 * (lo + hi);
    double lambda = mean / gamma1p(1.0 / k);
    return {k, lambda};
}

SampleTensor sample_weibull_field(const MomentField& field, int N, uint64_t seed) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    const int S = static_cast<int>(field.mean.size());
    const int T = static_cast<int>(field.mean[0].rows());
    const int W = static_cast<int>(field.mean[0].cols());
    SampleTensor tensor(S, T, W, N);
    std::mt19937_64 rng(seed);
    for (int s = 0; s < S; ++s)
        for (int t = 0; t < T; ++t)
            for (int w = 0; w < W; ++w) {
                auto [k, lambda] =
                    weibull_params_from_moments(field.mean[s](t, w), field.variance[s](t, w));
                for (int i = 0; i < N; ++i)
                    tensor.at(s, t, w, i) = weibull_draw(rng, k, lambda);
            }
    return tensor;
}

CopulaModel fit_copula_generator(const Eigen::MatrixXd& raw_samples) {
    const int n = static_cast<int>(raw_samples.rows());
    const int W = static_cast<int>(raw_samples.cols());
    if (n < 2) throw std::invalid_argument("copula fit needs at least 2 samples per site");

    Eigen::MatrixXd data = raw_samples;
    // Constant columns break the rank transform; jitter them slightly.
    for (int w = 0; w < W; ++w) {
        if (data.col(w).maxCoeff() - data.col(w).minCoeff() == 0.0) {
            double amp = 1e-9 * (1.0 + std::abs(data(0, w)));
            for (int i = 0; i < n; ++i) data(i, w) += amp * (static_cast<double>(i) / n - 0.5);
        }
    }

    CopulaModel model;
    Eigen::MatrixXd gauss(n, W);
    for (int w = 0; w < W; ++w) {
        Eigen::VectorXd col = data.col(w);
        std::sort(col.data(), col.data() + n);
        model.marginal_values.push_back(col);
        // Midpoint ranks keep the transform inside (0,1).
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return data(a, w) < data(b, w); });
        for (int r = 0; r < n; ++r) gauss(order[r], w) = probit((r + 0.5) / n);
    }

    Eigen::RowVectorXd gmean = gauss.colwise().mean();
    Eigen::MatrixXd centered = gauss.rowwise() - gmean;
    Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();
    corr = 0.5 * (corr + corr.transpose());
    corr.diagonal().setOnes();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-8)
        throw std::runtime_error("transformed correlation matrix not PSD, eigenvalue " +
                                 std::to_string(min_eig));
    model.gauss_correlation = corr;

    Eigen::RowVectorXd rmean = raw_samples.colwise().mean();
    Eigen::MatrixXd rcentered = raw_samples.rowwise() - rmean;
    model.target_mean = rmean.transpose();
    model.target_covariance = rcentered.transpose() * rcentered / (n - 1);
    return model;
}

Eigen::MatrixXd generate_copula_samples(const CopulaModel& model, int N, int iterations,
                                        uint64_t seed) {
    if (N < 1 || iterations < 1)
        throw std::invalid_argument("N and iterations must be >= 1");
    const int W = model.num_sites();
    std::mt19937_64 rng(seed);

    // Factor the Gaussian correlation; fall back to an eigenvalue square root
    // when semidefinite.
    Eigen::MatrixXd corr_factor;
    Eigen::LLT<Eigen::MatrixXd> llt(model.gauss_correlation);
    if (llt.info() == Eigen::Success) {
        corr_factor = llt.matrixL();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.gauss_correlation);
        corr_factor = es.eigenvectors() *
                      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    // Box-Muller keeps draws reproducible across standard libraries.
    Eigen::MatrixXd normals(N, W);
    for (int i = 0; i < N; ++i)
        for (int w = 0; w < W; w += 2) {
            double u1 = next_uniform(rng), u2 = next_uniform(rng);
            double r = std::sqrt(-2.0 * std::log(u1));
            normals(i, w) = r * std::cos(2 * std::numbers::pi * u2);
            if (w + 1 < W) normals(i, w + 1) = r * std::sin(2 * std::numbers::pi * u2);
        }
    Eigen::MatrixXd gauss = normals * corr_factor.transpose();

    Eigen::MatrixXd samples(N, W);
    for (int w = 0; w < W; ++w) {
        // Quantile map on a fixed knot grid.
        Eigen::VectorXd knots(kQuantileKnots);
        for (int q = 0; q < kQuantileKnots; ++q)
            knots(q) = empirical_quantile(model.marginal_values[w],
                                          static_cast<double>(q) / (kQuantileKnots - 1));
        for (int i = 0; i < N; ++i) {
            double u = normal_cdf(gauss(i, w));
            double pos = u * (kQuantileKnots - 1);
            int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, kQuantileKnots - 2);
            double frac = pos - lo;
            samples(i, w) = knots(lo) * (1 - frac) + knots(lo + 1) * frac;
        }
    }

    auto cholesky_with_ridge = [W](Eigen::MatrixXd cov) {
        Eigen::LLT<Eigen::MatrixXd> f(cov);
        if (f.info() != Eigen::Success) {
            double ridge = 1e-10 * cov.trace() / W;
            cov.diagonal().array() += std::max(ridge, 1e-14);
            f.compute(cov);
            if (f.info() != Eigen::Success)
                throw std::runtime_error("covariance factorization failed despite ridge");
        }
        return Eigen::MatrixXd(f.matrixL());
    };
    Eigen::MatrixXd target_l = cholesky_with_ridge(model.target_covariance);

    for (int it = 0; it < iterations; ++it) {
        samples = samples.cwiseMax(0.0);
        Eigen::RowVectorXd mean = samples.colwise().mean();
        Eigen::MatrixXd centered = samples.rowwise() - mean;
        Eigen::MatrixXd cov = centered.transpose() * centered / (N - 1);
        Eigen::MatrixXd cur_l = cholesky_with_ridge(cov);
        // Whiten with the current factor, re-correlate with the target one.
        Eigen::MatrixXd white =
            cur_l.triangularView<Eigen::Lower>().solve(centered.transpose()).transpose();
        samples = (white * target_l.transpose()).rowwise() + model.target_mean.transpose();
    }
    return samples.cwiseMax(0.0);
}

ForecastTable forecast_from_samples(const SampleTensor& train) {
    if (train.num_samples() < 1) throw std::invalid_argument("empty sample tensor");
    ForecastTable table(train.num_scenarios(), train.num_periods(), train.num_sites());
    for (int s = 0; s < train.num_scenarios(); ++s)
        for (int t = 0; t < train.num_periods(); ++t)
            for (int w = 0; w < train.num_sites(); ++w) {
                double sum = 0;
                for (int i = 0; i < train.num_samples(); ++i) sum += train.at(s, t, w, i);
                table.at(s, t, w) = sum / train.num_samples();
            }
    return table;
}

std::pair<SampleTensor, SampleTensor> split_samples(const SampleTensor& tensor,
                                                    double train_fraction, uint64_t seed) {
    if (train_fraction <= 0 || train_fraction >= 1)
        throw std::invalid_argument("train fraction must lie in (0,1)");
    const int N = tensor.num_samples();
    const int n_train = static_cast<int>(std::round(train_fraction * N));
    if (n_train < 2) throw std::invalid_argument("train split too small for covariance");
    const int n_test = N - n_train;
    if (n_test < 1) throw std::invalid_argument("test split is empty");

    SampleTensor train(tensor.num_scenarios(), tensor.num_periods(), tensor.num_sites(),
                       n_train);
    SampleTensor test(tensor.num_scenarios(), tensor.num_periods(), tensor.num_sites(),
                      n_test);
    std::mt19937_64 rng(seed);
    for (int s = 0; s < tensor.num_scenarios(); ++s)
        for (int t = 0; t < tensor.num_periods(); ++t) {
            std::vector<int> idx(N);
            for (int i = 0; i < N; ++i) idx[i] = i;
            // Fisher-Yates with our own uniform keeps the split portable.
            for (int i = N - 1; i > 0; --i) {
                int j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
                std::swap(idx[i], idx[j]);
            }
            for (int w = 0; w < tensor.num_sites(); ++w) {
                for (int i = 0; i < n_train; ++i)
                    train.at(s, t, w, i) = tensor.at(s, t, w, idx[i]);
                for (int i = 0; i < n_test; ++i)
                    test.at(s, t, w, i) = tensor.at(s, t, w, idx[n_train + i]);
            }
        }
    return {std::move(train), std::move(test)};
}

SampleTensor load_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sample file: " + path);
    std::string line;
    std::getline(in, line);  // header
    struct Row {
        int s, t, w, i;
        double v;
    };
    std::vector<Row> rows;
    int S = 0, T = 0, W = 0, N = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        Row r;
        char comma;
        ss >> r.s >> comma >> r.t >> comma >> r.w >> comma >> r.i >> comma >> r.v;
        S = std::max(S, r.s + 1);
        T = std::max(T, r.t + 1);
        W = std::max(W, r.w + 1);
        N = std::max(N, r.i + 1);
        rows.push_back(r);
    }
    SampleTensor tensor(S, T, W, N);
    for (const auto& r : rows) tensor.at(r.s, r.t, r.w, r.i) = r.v;
    return tensor;
}

void save_samples_csv(const SampleTensor& tensor, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sample file: " + path);
    out << "s,t,w,i,value\n";
    out.precision(17);
    for (int s = 0; s < tensor.num_scenarios(); ++s)
        for (int t = 0; t < tensor.num_periods(); ++t)
            for (int w = 0; w < tensor.num_sites(); ++w)
                for (int i = 0; i < tensor.num_samples(); ++i)
                    out << s << ',' << t << ',' << w << ',' << i << ','
                        << tensor.at(s, t, w, i) << '\n';
}

ForecastTable load_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open forecast file: " + path);
    std::string line;
    std::getline(in, line);
    struct Row {
        int s, t, w;
        double v;
    };
    std::vector<Row> rows;
    int S = 0, T = 0, W = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        Row r;
        char comma;
        ss >> r.s >> comma >> r.t >> comma >> r.w >> comma >> r.v;
        S = std::max(S, r.s + 1);
        T = std::max(T, r.t + 1);
        W = std::max(W, r.w + 1);
        rows.push_back(r);
    }
    ForecastTable table(S, T, W);
    for (const auto& r : rows) table.at(r.s, r.t, r.w) = r.v;
    return table;
}

void save_forecast_csv(const ForecastTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write forecast file: " + path);
    out << "s,t,w,value\n";
    out.precision(17);
    for (int s = 0; s < table.num_scenarios(); ++s)
        for (int t = 0; t < table.num_periods(); ++t)
            for (int w = 0; w < table.num_sites(); ++w)
                out << s << ',' << t << ',' << w << ',' << table.at(s, t, w) << '\n';
}

}  // namespace windplan
