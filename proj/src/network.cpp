#include "nlcp/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace nlcp {

int param_dim(const NetworkShape& shape) {
    shape.validate();
    return shape.param_dim();
}

NetworkParams::NetworkParams(NetworkShape s, Eigen::VectorXd values)
    : shape(s), theta(std::move(values)) {
    shape.validate();
    if (theta.size() != shape.param_dim())
        throw std::invalid_argument("NetworkParams: expected " + std::to_string(shape.param_dim()) +
                                    " coordinates, got " + std::to_string(theta.size()));
}

NetworkParams NetworkParams::zeros(NetworkShape s) {
    s.validate();
    return NetworkParams(s, Eigen::VectorXd::Zero(s.param_dim()));
}

NetworkParams NetworkParams::constant_fit(NetworkShape s, double nu0) {
    NetworkParams out = zeros(s);
    out.theta[0] = nu0;
    return out;
}

double activation(double y) {
    if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
    double e = std::exp(y);
    return e / (1.0 + e);
}

double activation_deriv(double y) {
    double s = activation(y);
    return s * (1.0 - s);
}

double activation_second_deriv(double y) {
    double s = activation(y);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

double eval_network(const NetworkParams& params, const Eigen::VectorXd& y) {
    const auto& shape = params.shape;
    if (y.size() != shape.input_dim())
        throw std::invalid_argument("eval_network: regressor dimension mismatch");
    double acc = params.nu0();
    for (int i = 0; i < shape.h; ++i)
        acc += params.nu(i) * activation(params.a(i).dot(y) + params.b(i));
    return acc;
}

Eigen::VectorXd eval_network(const NetworkParams& params, const Eigen::MatrixXd& y_rows) {
    const auto& shape = params.shape;
    if (y_rows.cols() != shape.input_dim())
        throw std::invalid_argument("eval_network: regressor dimension mismatch");
    const Eigen::Index n = y_rows.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(n, params.nu0());
    for (int i = 0; i < shape.h; ++i) {
        Eigen::ArrayXd z = (y_rows * params.a(i)).array() + params.b(i);
        out.array() += params.nu(i) * z.unaryExpr([](double v) { return activation(v); });
    }
    return out;
}

Eigen::MatrixXd gradient_features(const NetworkParams& params, const Eigen::MatrixXd& y_rows) {
    const auto& shape = params.shape;
    if (y_rows.cols() != shape.input_dim())
        throw std::invalid_argument("gradient_features: regressor dimension mismatch");
    const Eigen::Index n = y_rows.rows();
    const int in = shape.input_dim();
    Eigen::MatrixXd grad(n, shape.param_dim());
    grad.col(0).setOnes();  // d f / d nu0
    for (int i = 0; i < shape.h; ++i) {
        Eigen::ArrayXd z = (y_rows * params.a(i)).array() + params.b(i);
        Eigen::ArrayXd psi = z.unaryExpr([](double v) { return activation(v); });
        Eigen::ArrayXd dpsi = psi * (1.0 - psi);
        grad.col(1 + i) = psi;
        Eigen::ArrayXd scale = params.nu(i) * dpsi;
        for (int j = 0; j < in; ++j)
            grad.col(params.a_offset() + i * in + j) = scale * y_rows.col(j).array();
        grad.col(params.b_offset() + i) = scale;
    }
    return grad;
}

Eigen::VectorXd grad_network(const NetworkParams& params, const Eigen::VectorXd& y) {
    if (y.size() != params.shape.input_dim())
        throw std::invalid_argument("grad_network: regressor dimension mismatch");
    return gradient_features(params, y.transpose()).row(0);
}

NetworkParams canonicalize(const NetworkParams& params) {
    const auto& shape = params.shape;
    const int in = shape.input_dim();
    for (int i = 0; i < shape.h; ++i)
        if (params.nu(i) == 0.0)
            throw ZeroOutputWeightError("canonicalize: unit " + std::to_string(i) +
                                        " has zero output weight; prune it first");

    double nu0 = params.nu0();
    std::vector<double> nu(static_cast<std::size_t>(shape.h));
    std::vector<Eigen::VectorXd> a(static_cast<std::size_t>(shape.h));
    std::vector<double> b(static_cast<std::size_t>(shape.h));
    for (int i = 0; i < shape.h; ++i) {
        nu[i] = params.nu(i);
        a[i] = params.a(i);
        b[i] = params.b(i);
        if (nu[i] < 0.0) {
            // sign-flip: nu0 absorbs nu_i, unit is mirrored through psi(y)=1-psi(-y)
            nu0 += nu[i];
            nu[i] = -nu[i];
            a[i] = -a[i];
            b[i] = -b[i];
        }
    }
    std::vector<int> order(static_cast<std::size_t>(shape.h));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return nu[l] > nu[r]; });

    Eigen::VectorXd theta(shape.param_dim());
    theta[0] = nu0;
    for (int i = 0; i < shape.h; ++i) {
        int src = order[static_cast<std::size_t>(i)];
        theta[1 + i] = nu[src];
        theta.segment(params.a_offset() + i * in, in) = a[src];
        theta[params.b_offset() + i] = b[src];
    }
    return NetworkParams(shape, std::move(theta));
}

NetworkParams prune_units(const NetworkParams& params, double threshold) {
    const auto& shape = params.shape;
    const int in = shape.input_dim();
    std::vector<int> keep;
    for (int i = 0; i < shape.h; ++i)
        if (std::abs(params.nu(i)) >= threshold) keep.push_back(i);
    if (static_cast<int>(keep.size()) == shape.h) return params;

    NetworkShape pruned{shape.p, shape.d, static_cast<int>(keep.size())};
    const int a_off = 1 + pruned.h;
    const int b_off = a_off + pruned.h * in;
    Eigen::VectorXd theta(pruned.param_dim());
    theta[0] = params.nu0();
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const int k = static_cast<int>(i);
        theta[1 + k] = params.nu(keep[i]);
        theta.segment(a_off + k * in, in) = params.a(keep[i]);
        theta[b_off + k] = params.b(keep[i]);
    }
    return NetworkParams(pruned, std::move(theta));
}

ParameterBox::ParameterBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("ParameterBox: bound dimensions differ");
    if (!(lower.array() < upper.array()).all())
        throw std::invalid_argument("ParameterBox: lower must be strictly below upper");
}

ParameterBox ParameterBox::symmetric(int dim, double half_width) {
    if (dim < 1 || half_width <= 0.0)
        throw std::invalid_argument("ParameterBox::symmetric: bad arguments");
    return ParameterBox(Eigen::VectorXd::Constant(dim, -half_width),
                        Eigen::VectorXd::Constant(dim, half_width));
}

Eigen::VectorXd ParameterBox::project(const Eigen::VectorXd& x) const {
    if (x.size() != lower.size())
        throw std::invalid_argument("ParameterBox::project: dimension mismatch");
    return x.cwiseMax(lower).cwiseMin(upper);
}

bool ParameterBox::contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
}

ParameterBox ParameterBox::select(const std::vector<int>& keep) const {
    Eigen::VectorXd lo(static_cast<Eigen::Index>(keep.size()));
    Eigen::VectorXd hi(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        lo[static_cast<Eigen::Index>(i)] = lower[keep[i]];
        hi[static_cast<Eigen::Index>(i)] = upper[keep[i]];
    }
    return ParameterBox(std::move(lo), std::move(hi));
}

}  // namespace nlcp
