#pragma once

#include <Eigen/Dense>

#include "nlcp/dataset.hpp"
#include "nlcp/fitting.hpp"
#include "nlcp/network.hpp"

namespace nlcp {

// Cumulative score path: row k = S(k; theta) = sum_{t<=k} grad f(y_t)(x_t - f(y_t)).
// Row 0 is zero; n+1 rows in total. grad_loss(theta) == -2 * last row.
struct ScorePath {
    Eigen::MatrixXd sums;  // (n+1) x q
    NetworkParams theta;

    int n() const { return static_cast<int>(sums.rows()) - 1; }
    int q() const { return static_cast<int>(sums.cols()); }
    Eigen::MatrixXd scores() const;  // per-observation rows, n x q
};

ScorePath score_partial_sums(const RegressionDataset& data, const NetworkParams& theta);

struct WeightConfig {
    double eta = 0.0;
    double gamma = 0.0;

    WeightConfig() = default;
    WeightConfig(double e, double g) : eta(e), gamma(g) { validate(); }
    void validate() const {
        if (eta < 0.0 || eta > 0.5 || gamma < 0.0 || gamma > 0.5)
            throw std::invalid_argument("WeightConfig: eta and gamma must lie in [0, 1/2]");
    }
    bool is_darling_erdos_corner() const { return eta == 0.0 && gamma == 0.5; }
};

// w_{eta,gamma}(s) = 1{eta < s < 1-eta} * (s(1-s))^{-gamma}
double weight(double s, const WeightConfig& cfg);

// Symmetric PSD matrix selecting the monitored score directions. Validated on
// construction: eigenvalues below -1e-10 * spectral radius raise NotPsdError,
// small negatives are clipped; the numerical rank is recorded.
struct WeightMatrix {
    Eigen::MatrixXd a;
    int rank = 0;

    WeightMatrix() = default;
    explicit WeightMatrix(Eigen::MatrixXd m);

    int dim() const { return static_cast<int>(a.rows()); }
};

// ||x||_A = sqrt(x' A x)
double a_norm(const Eigen::VectorXd& x, const WeightMatrix& A);

// The predecessor's residual-only choice: all zeros except a one at (0,0),
// the coordinate whose score component is the plain residual.
WeightMatrix residual_matrix_a(int q);

struct TestStatistic {
    double value = 0.0;
    int k_argmax = 0;  // 1-based observation index, 1 <= k < n
};

// T_n(eta, gamma; A) = max_{1<=k<n} n^{-1/2} w(k/n) ||S(k)||_A, smallest
// maximizing k. Throws AllWeightsZeroError when the trimming removes every k.
TestStatistic test_statistic(const ScorePath& path, const WeightMatrix& A,
                             const WeightConfig& cfg);

TestStatistic test_statistic(const RegressionDataset& data, const NetworkParams& theta_hat,
                             const WeightMatrix& A, const WeightConfig& cfg);

struct TestReport {
    double statistic = 0.0;
    int k_argmax = 0;
    WeightConfig weight;
    WeightMatrix a_used;
    double critical_value = 0.0;
    bool rejected = false;
    double level = 0.05;
    double p_value = -1.0;  // negative when no quantile table was available
};

}  // namespace nlcp
