#pragma once

#include <optional>

#include <Eigen/Dense>

#include "nlcp/network.hpp"

namespace nlcp {

// Embedded regression sample: response x[t] with regressor row y.row(t) holding
// the p lagged values followed by the d exogenous values, t = 0..n-1.
struct RegressionDataset {
    Eigen::VectorXd x;
    Eigen::MatrixXd y;
    NetworkShape shape;

    int n() const { return static_cast<int>(x.size()); }

    // Rows [start, start+len) as their own dataset (used for the split refits).
    RegressionDataset rows(int start, int len) const;
};

// Builds the dataset from a raw series of length n+p; the first p values serve
// as starting lags only. Exogenous rows, when present, must align with the
// responses (one row per response, already lagged by the caller).
RegressionDataset embed_series(const Eigen::VectorXd& raw,
                               const std::optional<Eigen::MatrixXd>& exogenous,
                               NetworkShape shape);

}  // namespace nlcp
