#pragma once

#include <cstdint>

#include "nlcp/dataset.hpp"
#include "nlcp/network.hpp"

namespace nlcp {

struct FitConfig {
    ParameterBox box;        // empty -> symmetric default box below
    int restarts = 20;
    int max_iters = 300;
    double grad_tol = 1e-6;
    std::uint64_t seed = 1;
    double prune_threshold = 1e-10;
    double default_box_half_width = 10.0;

    void validate() const {
        if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be >= 1");
        if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
        if (grad_tol <= 0.0) throw std::invalid_argument("FitConfig: grad_tol must be > 0");
    }
};

struct FitResult {
    NetworkParams theta_hat;  // canonical; shape.h may be smaller after pruning
    double sse = 0.0;
    bool converged = false;
    int restarts_used = 0;
    double grad_norm = 0.0;
};

// Q_n(theta) = sum_t (x_t - f(y_t, theta))^2
double sse_loss(const NetworkParams& params, const RegressionDataset& data);

// grad Q_n(theta) = -2 * sum_t grad f(y_t, theta) (x_t - f(y_t, theta))
Eigen::VectorXd grad_loss(const NetworkParams& params, const RegressionDataset& data);

// Least-squares network fit over the box: multi-start damped BFGS with
// backtracking line search and box projection. Deterministic per seed;
// restart k draws its start point from substream k.
FitResult fit_network(const RegressionDataset& data, const FitConfig& cfg);

}  // namespace nlcp
