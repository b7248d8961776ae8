#include "nlcp/changepoint.hpp"

#include <cmath>

#include "nlcp/errors.hpp"
#include "nlcp/parallel.hpp"
#include "nlcp/rng.hpp"

namespace nlcp {

ChangePointEstimate change_point_estimate(const ScorePath& path, const WeightMatrix& A,
                                          const WeightConfig& cfg) {
    TestStatistic stat = test_statistic(path, A, cfg);
    ChangePointEstimate out;
    out.k_hat = stat.k_argmax;
    out.statistic_at_k = stat.value;
    out.weight = cfg;
    out.a_used = A;
    return out;
}

ChangePointEstimate change_point_estimate(const RegressionDataset& data,
                                          const NetworkParams& theta_hat, const WeightMatrix& A,
                                          const WeightConfig& cfg) {
    return change_point_estimate(score_partial_sums(data, theta_hat), A, cfg);
}

double drift_g(int s, double lambda, double gamma) {
    if (s == 0) return 0.0;
    if (s < 0) return (1.0 - gamma) * (1.0 - lambda) + gamma * lambda;
    return gamma * (1.0 - lambda) + (1.0 - gamma) * lambda;
}

namespace {

Eigen::MatrixXd scores_from_path(const PathGenerator& gen, const NetworkParams& theta, int len,
                                 std::mt19937_64& rng) {
    const NetworkShape& shape = theta.shape;
    if (shape.d > 0)
        throw std::invalid_argument("score sampling from path generators requires d == 0");
    Eigen::VectorXd raw = gen(len + shape.p, rng);
    if (raw.size() != len + shape.p)
        throw std::runtime_error("path generator returned wrong length");
    RegressionDataset data = embed_series(raw, std::nullopt, shape);
    Eigen::VectorXd r = data.x - eval_network(theta, data.y);
    return gradient_features(theta, data.y).array().colwise() * r.array();
}

Eigen::VectorXd batch_means_se(const Eigen::MatrixXd& rows) {
    const long n = rows.rows();
    const long blocks = std::min<long>(100, n);
    const long block_len = n / blocks;
    Eigen::MatrixXd means(blocks, rows.cols());
    for (long b = 0; b < blocks; ++b)
        means.row(b) = rows.middleRows(b * block_len, block_len).colwise().mean();
    Eigen::RowVectorXd grand = means.colwise().mean();
    Eigen::VectorXd var = (means.rowwise() - grand).array().square().colwise().sum().transpose() /
                          static_cast<double>(blocks - 1);
    return (var / static_cast<double>(blocks)).cwiseSqrt();
}

}  // namespace

ChangeMagnitude change_magnitude_d(const PathGenerator& pre_gen, const PathGenerator& post_gen,
                                   const NetworkParams& theta_tilde, double lambda, long mc_n,
                                   std::uint64_t seed) {
    if (mc_n < 100000)
        throw std::invalid_argument("change_magnitude_d: mc_n must be >= 1e5");
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("change_magnitude_d: lambda must be in (0,1)");

    auto rng_pre = make_rng(seed, 1);
    auto rng_post = make_rng(seed, 2);
    Eigen::MatrixXd s_pre =
        scores_from_path(pre_gen, theta_tilde, static_cast<int>(mc_n), rng_pre);
    Eigen::MatrixXd s_post =
        scores_from_path(post_gen, theta_tilde, static_cast<int>(mc_n), rng_post);

    ChangeMagnitude out;
    out.mean_pre = s_pre.colwise().mean().transpose();
    out.mean_post = s_post.colwise().mean().transpose();
    out.se_pre = batch_means_se(s_pre);
    out.se_post = batch_means_se(s_post);
    out.d_vec = out.mean_pre / (1.0 - lambda);
    out.d_vec_post = -out.mean_post / lambda;
    out.mc_n = mc_n;
    out.lambda = lambda;
    return out;
}

XiBlockSampler model_xi_sampler(PathGenerator gen, NetworkParams theta_tilde,
                                Eigen::VectorXd score_mean) {
    return [gen = std::move(gen), theta = std::move(theta_tilde),
            mean = std::move(score_mean)](int len, std::mt19937_64& rng) {
        Eigen::MatrixXd s = scores_from_path(gen, theta, len, rng);
        s.rowwise() -= mean.transpose();
        return s;
    };
}

XiBlockSampler empirical_xi_sampler(Eigen::MatrixXd centered_scores) {
    if (centered_scores.rows() < 1)
        throw std::invalid_argument("empirical_xi_sampler: need at least one score row");
    return [pool = std::move(centered_scores)](int len, std::mt19937_64& rng) {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.rows()) - 1);
        Eigen::MatrixXd out(len, pool.cols());
        for (int i = 0; i < len; ++i) out.row(i) = pool.row(pick(rng));
        return out;
    };
}

LimitLawSample simulate_limit_argmax(const LimitLawSpec& spec, long reps, std::uint64_t seed,
                                     int threads) {
    if (reps < 1) throw std::invalid_argument("simulate_limit_argmax: reps must be >= 1");
    if (spec.horizon < 1) throw std::invalid_argument("simulate_limit_argmax: horizon must be >= 1");
    if (!(spec.lambda > 0.0 && spec.lambda < 1.0))
        throw std::invalid_argument("simulate_limit_argmax: lambda must be in (0,1)");
    const Eigen::VectorXd projected = spec.a.a * spec.d_vec;
    const double d_norm2 = spec.d_vec.dot(projected);
    if (!(d_norm2 > 0.0))
        throw std::invalid_argument("simulate_limit_argmax: ||D||_A must be positive");

    const int K = spec.horizon;
    const double drift_neg = drift_g(-1, spec.lambda, spec.gamma) * d_norm2;
    const double drift_pos = drift_g(+1, spec.lambda, spec.gamma) * d_norm2;

    LimitLawSample out;
    out.seed = seed;
    out.draws.assign(static_cast<std::size_t>(reps), 0);
    std::vector<unsigned char> at_edge(static_cast<std::size_t>(reps), 0);

    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
        auto rng = make_rng(seed, rep);
        Eigen::MatrixXd pre = spec.xi_pre(K, rng);
        Eigen::MatrixXd post = spec.xi_post(K, rng);
        // values over s = -K..K; index s + K
        std::vector<double> value(static_cast<std::size_t>(2 * K + 1), 0.0);
        double walk = 0.0;
        for (int j = 1; j <= K; ++j) {
            walk += projected.dot(pre.row(j - 1));
            value[static_cast<std::size_t>(K - j)] = walk - j * drift_neg;
        }
        walk = 0.0;
        for (int j = 1; j <= K; ++j) {
            walk += projected.dot(post.row(j - 1));
            value[static_cast<std::size_t>(K + j)] = walk - j * drift_pos;
        }
        int best_s = -K;
        double best = value[0];
        for (int s = -K + 1; s <= K; ++s) {
            double v = value[static_cast<std::size_t>(s + K)];
            if (v > best) {
                best = v;
                best_s = s;
            }
        }
        out.draws[rep] = best_s;
        at_edge[rep] = (best_s == K || best_s == -K) ? 1 : 0;
    });

    long edge = 0;
    for (unsigned char e : at_edge) edge += e;
    out.saturation_fraction = static_cast<double>(edge) / static_cast<double>(reps);
    out.saturated = out.saturation_fraction > 0.05;
    return out;
}

}  // namespace nlcp
