#pragma once

#include <optional>

#include "nlcp/fitting.hpp"
#include "nlcp/score.hpp"

namespace nlcp {

enum class CovKind { pooled, split, long_run };

struct CovEstimate {
    Eigen::MatrixXd matrix;
    CovKind kind = CovKind::pooled;
    int dof = 0;
    std::optional<int> k0;  // split point used, when kind == split
};

// (1/(n-q)) * sum_t q(t) q(t)', uncentered per-observation score outer products.
CovEstimate pooled_covariance(const ScorePath& path);

struct SplitCovariance {
    CovEstimate estimate;
    int k0 = 0;
    FitResult fit_pre;
    FitResult fit_post;
};

// Change-robust covariance: locate the preliminary split k0 as the argmax of
// the pooled-inverse-weighted score norm, refit each segment, and pool the
// per-segment score outer products. A refit that degenerates to a different
// parameter dimension falls back to the full-sample parameters for scoring.
SplitCovariance split_covariance(const RegressionDataset& data, const FitResult& full_fit,
                                 const FitConfig& fit_cfg);

// Bartlett-kernel HAC estimate of the long-run score covariance; bandwidth 0
// reproduces the pooled estimator exactly. Negative bandwidth selects
// floor(n^(1/3)).
CovEstimate long_run_covariance(const ScorePath& path, int bandwidth);

// Eigenvalue-floored inverse: values below max(ridge, 1e-8 * trace/q) are
// lifted to that floor before inversion, so the result is always PD.
WeightMatrix inverse_psd(const CovEstimate& c, double ridge = 0.0);

}  // namespace nlcp
