#include "nlcp/score.hpp"

#include <cmath>

#include "nlcp/errors.hpp"

namespace nlcp {

Eigen::MatrixXd ScorePath::scores() const {
    return sums.bottomRows(n()) - sums.topRows(n());
}

ScorePath score_partial_sums(const RegressionDataset& data, const NetworkParams& theta) {
    if (theta.shape.input_dim() != data.shape.input_dim())
        throw std::invalid_argument("score_partial_sums: shape mismatch");
    const int n = data.n();
    const int q = theta.shape.param_dim();
    Eigen::VectorXd r = data.x - eval_network(theta, data.y);
    Eigen::MatrixXd per_obs = gradient_features(theta, data.y).array().colwise() * r.array();

    ScorePath path;
    path.theta = theta;
    path.sums.resize(n + 1, q);
    path.sums.row(0).setZero();
    for (int t = 0; t < n; ++t) path.sums.row(t + 1) = path.sums.row(t) + per_obs.row(t);
    return path;
}

double weight(double s, const WeightConfig& cfg) {
    if (!(s > cfg.eta && s < 1.0 - cfg.eta)) return 0.0;
    if (cfg.gamma == 0.0) return 1.0;
    return std::pow(s * (1.0 - s), -cfg.gamma);
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("WeightMatrix: matrix must be square");
    if (!m.allFinite()) throw NonFiniteError("WeightMatrix: non-finite entries");
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    double scale = m.cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("WeightMatrix: matrix is not symmetric");
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    double radius = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    if (ev.minCoeff() < -1e-10 * radius)
        throw NotPsdError("WeightMatrix: negative eigenvalue " + std::to_string(ev.minCoeff()));

    double rank_tol = 1e-12 * std::max(radius, 1.0);
    rank = static_cast<int>((ev.array() > rank_tol).count());
    if (ev.minCoeff() >= 0.0) {
        a = std::move(sym);  // keep the exact input when already PSD
    } else {
        Eigen::VectorXd clipped = ev.cwiseMax(0.0);
        a = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
        a = 0.5 * (a + a.transpose());
    }
}

double a_norm(const Eigen::VectorXd& x, const WeightMatrix& A) {
    if (x.size() != A.dim()) throw std::invalid_argument("a_norm: dimension mismatch");
    double quad = x.dot(A.a * x);
    double tol = 1e-10 * std::max(1.0, A.a.cwiseAbs().maxCoeff() * x.squaredNorm());
    if (quad < -tol) throw NotPsdError("a_norm: quadratic form is negative");
    return std::sqrt(std::max(quad, 0.0));
}

WeightMatrix residual_matrix_a(int q) {
    if (q < 1) throw std::invalid_argument("residual_matrix_a: q must be >= 1");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
    m(0, 0) = 1.0;
    return WeightMatrix(std::move(m));
}

TestStatistic test_statistic(const ScorePath& path, const WeightMatrix& A,
                             const WeightConfig& cfg) {
    const int n = path.n();
    if (n < 3) throw std::invalid_argument("test_statistic: need n >= 3");
    if (A.dim() != path.q()) throw std::invalid_argument("test_statistic: A dimension mismatch");
    const double root_n = std::sqrt(static_cast<double>(n));

    TestStatistic best;
    bool any = false;
    for (int k = 1; k < n; ++k) {
        double w = weight(static_cast<double>(k) / n, cfg);
        if (w == 0.0) continue;
        double value = w * a_norm(path.sums.row(k).transpose(), A) / root_n;
        if (!any || value > best.value) {
            best.value = value;
            best.k_argmax = k;
            any = true;
        }
    }
    if (!any)
        throw AllWeightsZeroError("test_statistic: trimming eta=" + std::to_string(cfg.eta) +
                                  " removes every k");
    return best;
}

TestStatistic test_statistic(const RegressionDataset& data, const NetworkParams& theta_hat,
                             const WeightMatrix& A, const WeightConfig& cfg) {
    return test_statistic(score_partial_sums(data, theta_hat), A, cfg);
}

}  // namespace nlcp
