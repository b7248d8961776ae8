#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "nlcp/dataset.hpp"
#include "nlcp/score.hpp"

namespace nlcp {

struct ChangePointEstimate {
    int k_hat = 0;  // 1-based, 1 <= k_hat < n
    double statistic_at_k = 0.0;
    WeightConfig weight;
    WeightMatrix a_used;
};

// argmax_k w(k/n) ||S(k; theta_hat)||_A, smallest k on ties; shares its code
// path (and therefore its argmax) with test_statistic.
ChangePointEstimate change_point_estimate(const ScorePath& path, const WeightMatrix& A,
                                          const WeightConfig& cfg);
ChangePointEstimate change_point_estimate(const RegressionDataset& data,
                                          const NetworkParams& theta_hat, const WeightMatrix& A,
                                          const WeightConfig& cfg);

// Piecewise drift rate of the limit process W_s - |s| g(s) ||D||_A^2.
double drift_g(int s, double lambda, double gamma);

// Draws a fresh stationary raw series of the requested length (including the
// p starting lags) from one regime.
using PathGenerator = std::function<Eigen::VectorXd(int n_plus_p, std::mt19937_64&)>;

// Produces `len` consecutive centered score increments xi as a len x q matrix.
using XiBlockSampler = std::function<Eigen::MatrixXd(int len, std::mt19937_64&)>;

struct ChangeMagnitude {
    Eigen::VectorXd d_vec;        // (1/(1-lambda)) E[pre-regime score at theta_tilde]
    Eigen::VectorXd d_vec_post;   // -(1/lambda) E[post-regime score]; cross-check
    Eigen::VectorXd mean_pre;     // E[q(t, theta_tilde)] under each regime
    Eigen::VectorXd mean_post;
    Eigen::VectorXd se_pre;       // batch-means standard errors of the means
    Eigen::VectorXd se_post;
    long mc_n = 0;
    double lambda = 0.0;
};

// Monte-Carlo estimate of the change magnitude D from stationary regime
// samplers evaluated at the best-approximating parameter theta_tilde.
ChangeMagnitude change_magnitude_d(const PathGenerator& pre_gen, const PathGenerator& post_gen,
                                   const NetworkParams& theta_tilde, double lambda, long mc_n,
                                   std::uint64_t seed);

// Model-based xi sampler: draws a fresh stationary path, scores it at
// theta_tilde and subtracts the regime score mean.
XiBlockSampler model_xi_sampler(PathGenerator gen, NetworkParams theta_tilde,
                                Eigen::VectorXd score_mean);

// Empirical xi sampler: i.i.d. resampling of observed centered score rows.
// Discrete and dependence-free by construction; an approximation.
XiBlockSampler empirical_xi_sampler(Eigen::MatrixXd centered_scores);

struct LimitLawSpec {
    Eigen::VectorXd d_vec;
    WeightMatrix a;
    double lambda = 0.5;
    double gamma = 0.0;
    XiBlockSampler xi_pre;
    XiBlockSampler xi_post;
    int horizon = 200;  // argmax searched over s in [-horizon, horizon]
};

struct LimitLawSample {
    std::vector<int> draws;  // one argmax location per replication
    double saturation_fraction = 0.0;
    bool saturated = false;  // more than 5% of draws pinned at +-horizon
    std::uint64_t seed = 0;
};

// Simulates argmax{ W_s - |s| g(s) ||D||_A^2 } over integer s in
// [-horizon, horizon], W built from cumulative D'A xi sums (pre-regime
// increments left of zero, post-regime right, W_0 = 0); smallest s on ties.
LimitLawSample simulate_limit_argmax(const LimitLawSpec& spec, long reps, std::uint64_t seed,
                                     int threads = 0);

}  // namespace nlcp
