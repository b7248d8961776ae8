#include "nlcp/covariance.hpp"

#include <cmath>

#include "nlcp/errors.hpp"
#include "nlcp/rng.hpp"

namespace nlcp {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd score_rows(const RegressionDataset& data, const NetworkParams& theta) {
    Eigen::VectorXd r = data.x - eval_network(theta, data.y);
    return gradient_features(theta, data.y).array().colwise() * r.array();
}

}  // namespace

CovEstimate pooled_covariance(const ScorePath& path) {
    const int n = path.n();
    const int q = path.q();
    if (n <= q) throw std::invalid_argument("pooled_covariance: need n > q");
    Eigen::MatrixXd s = path.scores();
    CovEstimate out;
    out.matrix = symmetrized(s.transpose() * s / static_cast<double>(n - q));
    out.kind = CovKind::pooled;
    out.dof = n - q;
    return out;
}

SplitCovariance split_covariance(const RegressionDataset& data, const FitResult& full_fit,
                                 const FitConfig& fit_cfg) {
    const int n = data.n();
    const NetworkParams& theta = full_fit.theta_hat;
    const int q = theta.shape.param_dim();
    if (n <= 2 * q) throw std::invalid_argument("split_covariance: need n > 2q");

    ScorePath path = score_partial_sums(data, theta);
    CovEstimate sigma = pooled_covariance(path);
    WeightMatrix sigma_inv = inverse_psd(sigma);
    TestStatistic prelim = test_statistic(path, sigma_inv, WeightConfig(0.0, 0.0));
    const int k0 = prelim.k_argmax;
    if (k0 <= q || n - k0 <= q)
        throw SegmentTooShortError("split_covariance: segment at k0=" + std::to_string(k0) +
                                   " leaves fewer than q+1 observations");

    RegressionDataset pre = data.rows(0, k0);
    RegressionDataset post = data.rows(k0, n - k0);
    // keep every unit so segment scores stay in the full coordinate system
    FitConfig seg_cfg = fit_cfg;
    seg_cfg.prune_threshold = 0.0;
    std::uint64_t s = fit_cfg.seed;
    seg_cfg.seed = splitmix64(s);
    FitResult fit_pre = fit_network(pre, seg_cfg);
    seg_cfg.seed = splitmix64(s);
    FitResult fit_post = fit_network(post, seg_cfg);

    const NetworkParams& theta_pre =
        fit_pre.theta_hat.shape.param_dim() == q ? fit_pre.theta_hat : theta;
    const NetworkParams& theta_post =
        fit_post.theta_hat.shape.param_dim() == q ? fit_post.theta_hat : theta;

    Eigen::MatrixXd s_pre = score_rows(pre, theta_pre);
    Eigen::MatrixXd s_post = score_rows(post, theta_post);
    SplitCovariance out;
    out.estimate.matrix = symmetrized(
        (s_pre.transpose() * s_pre + s_post.transpose() * s_post) / static_cast<double>(n - q));
    out.estimate.kind = CovKind::split;
    out.estimate.dof = n - q;
    out.estimate.k0 = k0;
    out.k0 = k0;
    out.fit_pre = std::move(fit_pre);
    out.fit_post = std::move(fit_post);
    return out;
}

CovEstimate long_run_covariance(const ScorePath& path, int bandwidth) {
    const int n = path.n();
    const int q = path.q();
    if (n <= q) throw std::invalid_argument("long_run_covariance: need n > q");
    if (bandwidth < 0) bandwidth = static_cast<int>(std::floor(std::cbrt(static_cast<double>(n))));
    if (bandwidth >= (n + 1) / 2)
        throw std::invalid_argument("long_run_covariance: bandwidth must be below n/2");

    Eigen::MatrixXd s = path.scores();
    const double denom = static_cast<double>(n - q);
    Eigen::MatrixXd acc = s.transpose() * s / denom;
    for (int l = 1; l <= bandwidth; ++l) {
        double w = 1.0 - static_cast<double>(l) / (bandwidth + 1);
        Eigen::MatrixXd cl =
            s.bottomRows(n - l).transpose() * s.topRows(n - l) / denom;  // sum_t s_t s_{t-l}'
        acc += w * (cl + cl.transpose());
    }
    CovEstimate out;
    out.matrix = symmetrized(acc);
    out.kind = CovKind::long_run;
    out.dof = n - q;
    return out;
}

WeightMatrix inverse_psd(const CovEstimate& c, double ridge) {
    if (ridge < 0.0) throw std::invalid_argument("inverse_psd: ridge must be >= 0");
    if (!c.matrix.allFinite()) throw NonFiniteError("inverse_psd: non-finite entries");
    const Eigen::Index q = c.matrix.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(c.matrix));
    double floor = std::max(ridge, 1e-8 * c.matrix.trace() / static_cast<double>(q));
    if (!(floor > 0.0))
        throw std::invalid_argument("inverse_psd: matrix has nonpositive trace and ridge is 0");
    Eigen::ArrayXd vals = eig.eigenvalues().array().max(floor);
    Eigen::MatrixXd inv =
        eig.eigenvectors() * vals.inverse().matrix().asDiagonal() * eig.eigenvectors().transpose();
    return WeightMatrix(symmetrized(inv));
}

}  // namespace nlcp
