#pragma once

#include <Eigen/Dense>

#include "nlcp/errors.hpp"

namespace nlcp {

// One-hidden-layer sigmoid network f(y, theta) = nu0 + sum_i nu_i * psi(<a_i, y> + b_i)
// with y in R^{p+d}. Parameters are stored flat in the fixed coordinate order
//   (nu0, nu_1..nu_h, a_11..a_1(p+d), ..., a_h1..a_h(p+d), b_1..b_h)
// so that gradients, score vectors and covariance matrices line up across modules.

struct NetworkShape {
    int p = 0;  // autoregressive lag order
    int d = 0;  // exogenous regressor dimension
    int h = 0;  // hidden units

    int input_dim() const { return p + d; }
    int param_dim() const { return (p + d + 2) * h + 1; }

    void validate() const {
        if (p < 0 || d < 0 || h < 0)
            throw std::invalid_argument("NetworkShape: p, d, h must be nonnegative");
        if (h >= 1 && p + d < 1)
            throw std::invalid_argument("NetworkShape: hidden units require p+d >= 1");
    }

    bool operator==(const NetworkShape&) const = default;
};

int param_dim(const NetworkShape& shape);

struct NetworkParams {
    NetworkShape shape;
    Eigen::VectorXd theta;  // length shape.param_dim()

    NetworkParams() = default;
    NetworkParams(NetworkShape s, Eigen::VectorXd values);

    static NetworkParams zeros(NetworkShape s);
    static NetworkParams constant_fit(NetworkShape s, double nu0);

    double nu0() const { return theta[0]; }
    double nu(int i) const { return theta[1 + i]; }                     // i in [0, h)
    double b(int i) const { return theta[b_offset() + i]; }
    Eigen::VectorBlock<const Eigen::VectorXd> a(int i) const {
        return theta.segment(a_offset() + i * shape.input_dim(), shape.input_dim());
    }

    int a_offset() const { return 1 + shape.h; }
    int b_offset() const { return 1 + shape.h + shape.h * shape.input_dim(); }
};

// Logistic activation and its derivatives; psi(y) = 1 - psi(-y).
double activation(double y);
double activation_deriv(double y);
double activation_second_deriv(double y);

double eval_network(const NetworkParams& params, const Eigen::VectorXd& y);

// Batch evaluation over regressor rows, one value per row.
Eigen::VectorXd eval_network(const NetworkParams& params, const Eigen::MatrixXd& y_rows);

// Analytic parameter gradient of f at y, in the flat coordinate order.
Eigen::VectorXd grad_network(const NetworkParams& params, const Eigen::VectorXd& y);

// Row t holds grad f(y_rows.row(t), theta); shared workhorse for losses and scores.
Eigen::MatrixXd gradient_features(const NetworkParams& params, const Eigen::MatrixXd& y_rows);

// Maps theta into the fundamental domain nu_1 >= ... >= nu_h > 0 by sign-flip
// transformations and unit reordering; the network function is unchanged.
// Throws ZeroOutputWeightError when some nu_i == 0 (caller must prune first).
NetworkParams canonicalize(const NetworkParams& params);

// Drops hidden units with |nu_i| < threshold, shrinking the shape accordingly.
NetworkParams prune_units(const NetworkParams& params, double threshold = 1e-10);

// Compact parameter search region; the fit never leaves it.
struct ParameterBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    ParameterBox() = default;
    ParameterBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

    static ParameterBox symmetric(int dim, double half_width);

    int dim() const { return static_cast<int>(lower.size()); }
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    bool contains(const Eigen::VectorXd& x) const;
    ParameterBox select(const std::vector<int>& keep) const;
};

}  // namespace nlcp
