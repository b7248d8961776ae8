#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

#include "nlcp/covariance.hpp"
#include "nlcp/fitting.hpp"
#include "nlcp/score.hpp"

namespace nlcp {

// Empirical quantiles of sup_{eta<s<1-eta} ||B(s)||_2 / (s(1-s))^gamma for a
// rank-dimensional standard Brownian bridge B. Reproducible from the key
// (rank, eta, gamma, grid_n, reps, seed, version).
struct QuantileTable {
    int rank = 0;
    double eta = 0.0;
    double gamma = 0.0;
    int grid_n = 0;
    long reps = 0;
    std::uint64_t seed = 0;
    std::map<double, double> quantiles;  // level -> value, monotone

    double quantile(double level) const;  // interpolates between tabulated levels
    double upper_tail_probability(double value) const;
};

inline constexpr int default_bridge_grid = 5000;
inline constexpr long default_bridge_reps = 100000;
inline constexpr std::uint64_t default_bridge_seed = 101;

// Monte-Carlo simulation of the weighted bridge-sup limit on a uniform grid.
// The per-replication supremum carries the standard discrete-monitoring
// continuity correction so grid defaults meet a 1% quantile accuracy target.
// Throws UseFiniteSampleCalibration at (eta, gamma) = (0, 1/2).
QuantileTable simulate_bridge_sup(int rank, const WeightConfig& cfg, int grid_n, long reps,
                                  std::uint64_t seed, int threads = 0);

struct CriticalValueOptions {
    int grid_n = default_bridge_grid;
    long reps = default_bridge_reps;
    std::uint64_t seed = default_bridge_seed;
    std::filesystem::path cache_dir;  // empty -> in-memory only
    int threads = 0;
};

// Lookup-or-simulate-and-store. Tables are cached in memory per process and,
// when cache_dir is set and writable, as self-describing text files.
double critical_value(int rank, const WeightConfig& cfg, double level,
                      const CriticalValueOptions& opts);

// Full table access for p-value reporting.
const QuantileTable& critical_value_table(int rank, const WeightConfig& cfg,
                                          const CriticalValueOptions& opts);

enum class ARule { residual, ablock, omnibus, file_matrix };

const char* to_string(ARule rule);
ARule a_rule_from_string(const std::string& name);

// Monitored-direction matrix for a test rule, built from a score covariance
// estimate: residual -> E11 / cov(0,0); ablock -> inverse of the a-coordinate
// block, embedded; omnibus -> inverse of the full matrix.
WeightMatrix build_test_matrix(ARule rule, const CovEstimate& cov, const NetworkShape& shape,
                               double ridge = 0.0);

// Dimension of the pivotal bridge limit under each rule.
int bridge_rank(ARule rule, const NetworkShape& shape);

// Parametric-bootstrap null quantile: simulate series from the fitted network
// with residuals resampled i.i.d. from the centered fit residuals, recompute
// T_n with the same rule each time, return the empirical `level` quantile.
// Serves the (0, 1/2) weight corner, which has no tabulated bridge limit.
double finite_sample_null_quantile(const FitResult& fitted, const RegressionDataset& data,
                                   const WeightConfig& cfg, ARule rule, double level, int reps,
                                   std::uint64_t seed, const FitConfig& fit_cfg, int threads = 0);

}  // namespace nlcp
