#pragma once

#include <string>
#include <vector>

#include "nlcp/changepoint.hpp"
#include "nlcp/critical_values.hpp"
#include "nlcp/dataset.hpp"
#include "nlcp/fitting.hpp"

namespace nlcp {

// Simulation families: GAR* are generated by a one-unit sigmoid network
// (correctly specified), AR*/TAR* are linear resp. threshold autoregressions
// (misspecified). All are first-order with standard normal errors.
enum class Family { gar1, gar2, gar3, gar4, ar1, ar2, tar1, tar2 };

const char* to_string(Family family);
Family family_from_string(const std::string& name);
int family_lag_order(Family family);

// Regime regression functions; regime 1 is pre-change, regime 2 post-change.
double scenario_g(Family family, int regime, double x);

enum class Coupling { independent_segments, continuous_path };

struct ScenarioSpec {
    Family family = Family::gar2;
    int n = 500;
    double tau = 1.0;  // change fraction; 1 = no change (the null variant)
    int burn_in = 500;
    Coupling coupling = Coupling::independent_segments;
    std::uint64_t seed = 1;

    int change_index() const { return static_cast<int>(std::floor(tau * n)); }
    void validate() const;
};

// Raw series of length n + p. Under independent_segments the post-change part
// is a fresh stationary regime-2 path (no carry-over of starting values);
// continuous_path switches the regression function on a single path instead.
Eigen::VectorXd generate(const ScenarioSpec& spec);

// Stationary single-regime sampler for the limit-law machinery.
PathGenerator stationary_path_generator(Family family, int regime, int burn_in = 500);

struct PowerRow {
    std::string scenario;
    std::string test_kind;  // T_residual, T_a, T_omnibus
    int n = 0;
    double tau = 1.0;
    double level = 0.05;
    long rejections = 0;
    long reps = 0;  // successful replications
    double rate = 0.0;
    long failures = 0;  // replications lost to fit/covariance errors
};

struct PowerStudyConfig {
    WeightConfig weight;
    double level = 0.05;
    std::vector<ARule> tests = {ARule::residual, ARule::ablock};
    int h = 1;
    FitConfig fit;
    CriticalValueOptions cv;
    int threads = 0;
};

// Rejection rates of the chosen tests over `reps` generated replications;
// each replication shares one full fit and one split covariance across tests.
std::vector<PowerRow> power_study(const ScenarioSpec& base, int reps,
                                  const PowerStudyConfig& cfg);

struct RepresentativeResult {
    NetworkParams theta_tilde;  // median-sse canonical fit among the replicates
    int n_used = 0;
    double v_hat = 0.0;  // U-statistic variability of the fitted functions
    int fit_failures = 0;
};

// Large-N approximation of the best-approximating parameter together with the
// pairwise fitted-function variability V-hat evaluated on held-out replicate
// regressor paths.
RepresentativeResult estimate_theta_representative(const ScenarioSpec& base, int big_n,
                                                   int m_reps, int h, const FitConfig& fit_cfg,
                                                   int threads = 0);

struct DistStudyConfig {
    ARule rule = ARule::residual;
    WeightConfig weight;
    int h = 1;
    FitConfig fit;
    long limit_reps = 20000;
    int horizon = 200;
    long mc_n = 200000;     // sample size for the change-magnitude estimate
    int rep_big_n = 100000; // series length for the theta-tilde representative
    int rep_m = 10;         // replicates for the representative
    int threads = 0;
};

struct DistStudyResult {
    std::vector<int> mhat_minus_m;  // finite-sample estimator errors
    LimitLawSample limit;
    double ks_distance = 0.0;
    RepresentativeResult representative;
    ChangeMagnitude magnitude;
    int fit_failures = 0;
};

// Pairs the finite-sample distribution of mhat - m with draws from the
// simulated limit law built at the representative parameter.
DistStudyResult estimator_distribution_study(const ScenarioSpec& spec, int m_reps,
                                             const DistStudyConfig& cfg);

// Kolmogorov-Smirnov helpers for integer-valued samples.
double ks_distance(const std::vector<int>& a, const std::vector<int>& b);
double ks_two_sample_p_value(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace nlcp
