#include "nlcp/fitting.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "nlcp/rng.hpp"

namespace nlcp {

double sse_loss(const NetworkParams& params, const RegressionDataset& data) {
    if (params.shape.input_dim() != data.shape.input_dim() || data.y.cols() != params.shape.input_dim())
        throw std::invalid_argument("sse_loss: shape mismatch");
    Eigen::VectorXd r = data.x - eval_network(params, data.y);
    return r.squaredNorm();
}

Eigen::VectorXd grad_loss(const NetworkParams& params, const RegressionDataset& data) {
    if (params.shape.input_dim() != data.shape.input_dim() || data.y.cols() != params.shape.input_dim())
        throw std::invalid_argument("grad_loss: shape mismatch");
    Eigen::VectorXd r = data.x - eval_network(params, data.y);
    return -2.0 * (gradient_features(params, data.y).transpose() * r);
}

namespace {

struct BoxMinimizeResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    double proj_grad_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
};

double projected_grad_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                           const ParameterBox& box) {
    return (x - box.project(x - g)).norm();
}

// Damped BFGS with backtracking Armijo line search; iterates stay inside the
// box via projection. Objective values only ever decrease.
template <typename ValueFn, typename GradFn>
BoxMinimizeResult minimize_box(const ValueFn& value, const GradFn& gradient,
                               Eigen::VectorXd x0, const ParameterBox& box, int max_iters,
                               double grad_tol) {
    const Eigen::Index q = x0.size();
    Eigen::VectorXd x = box.project(std::move(x0));
    double f = value(x);
    Eigen::VectorXd g = gradient(x);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(q, q);

    BoxMinimizeResult result;
    result.x = x;
    result.f = f;
    result.proj_grad_norm = projected_grad_norm(x, g, box);

    constexpr double armijo_c1 = 1e-4;
    for (int iter = 0; iter < max_iters; ++iter) {
        double pgn = projected_grad_norm(x, g, box);
        if (pgn <= grad_tol) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd dir = -(h_inv * g);
        if (dir.dot(g) >= -1e-12 * dir.norm() * g.norm()) {
            h_inv.setIdentity();
            dir = -g;
        }

        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = f;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double alpha = 1.0;
            while (alpha > 1e-16) {
                Eigen::VectorXd cand = box.project(x + alpha * dir);
                Eigen::VectorXd step = cand - x;
                if (step.squaredNorm() == 0.0) break;  // direction blocked by the box
                double fc = value(cand);
                if (fc <= f + armijo_c1 * g.dot(step)) {
                    x_new = std::move(cand);
                    f_new = fc;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted && attempt == 0) {
                h_inv.setIdentity();
                dir = -g;
            }
        }
        if (!accepted) break;  // stalled; best point so far is returned

        Eigen::VectorXd g_new = gradient(x_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            Eigen::VectorXd hy = h_inv * yv;
            double yhy = yv.dot(hy);
            // inverse BFGS update
            h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose());
            Eigen::MatrixXd cross = hy * s.transpose();
            h_inv -= (cross + cross.transpose()) / sy;
        }
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
        result.x = x;
        result.f = f;
        result.proj_grad_norm = projected_grad_norm(x, g, box);
        if (result.proj_grad_norm <= grad_tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// For fixed unit directions the model is linear in (nu0, nu); solving that
// subproblem exactly sharpens every restart at negligible cost.
Eigen::VectorXd solve_linear_weights(const Eigen::VectorXd& x, const RegressionDataset& data,
                                     const NetworkShape& shape, const ParameterBox& box) {
    NetworkParams params(shape, x);
    const int h = shape.h;
    Eigen::MatrixXd design(data.n(), h + 1);
    design.col(0).setOnes();
    for (int i = 0; i < h; ++i) {
        Eigen::ArrayXd z = (data.y * params.a(i)).array() + params.b(i);
        design.col(1 + i) = z.unaryExpr([](double v) { return activation(v); });
    }
    Eigen::VectorXd w = design.colPivHouseholderQr().solve(data.x);
    Eigen::VectorXd out = x;
    out.head(h + 1) = w;
    return box.project(out);
}

FitResult constant_result(const RegressionDataset& data, const ParameterBox& box,
                          int restarts_used, double grad_tol) {
    NetworkShape flat{data.shape.p, data.shape.d, 0};
    double mean = data.x.mean();
    double c = std::min(std::max(mean, box.lower[0]), box.upper[0]);
    FitResult result;
    result.theta_hat = NetworkParams::constant_fit(flat, c);
    result.sse = (data.x.array() - c).square().sum();
    double g = -2.0 * (data.x.array() - c).sum();
    Eigen::VectorXd gv(1);
    gv[0] = g;
    Eigen::VectorXd cv(1);
    cv[0] = c;
    ParameterBox box0(box.lower.head(1), box.upper.head(1));
    result.grad_norm = std::abs(g);
    result.converged = projected_grad_norm(cv, gv, box0) <= grad_tol;
    result.restarts_used = restarts_used;
    return result;
}

}  // namespace

FitResult fit_network(const RegressionDataset& data, const FitConfig& cfg) {
    cfg.validate();
    const NetworkShape shape = data.shape;
    const int q = shape.param_dim();
    if (data.n() <= q)
        throw std::invalid_argument("fit_network: need n > q (n=" + std::to_string(data.n()) +
                                    ", q=" + std::to_string(q) + ")");
    ParameterBox box = (cfg.box.dim() == q)
                           ? cfg.box
                           : ParameterBox::symmetric(q, cfg.default_box_half_width);

    if (shape.h == 0) return constant_result(data, box, 0, cfg.grad_tol);
    if (data.x.maxCoeff() - data.x.minCoeff() == 0.0)
        return constant_result(data, box, 0, cfg.grad_tol);  // degenerate sample: all units redundant

    auto value = [&](const Eigen::VectorXd& theta) {
        return sse_loss(NetworkParams(shape, theta), data);
    };
    auto gradient = [&](const Eigen::VectorXd& theta) {
        return grad_loss(NetworkParams(shape, theta), data);
    };

    BoxMinimizeResult best;
    for (int k = 0; k < cfg.restarts; ++k) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::VectorXd x0(q);
        for (int j = 0; j < q; ++j)
            x0[j] = box.lower[j] + unif(rng) * (box.upper[j] - box.lower[j]);
        x0 = solve_linear_weights(x0, data, shape, box);
        BoxMinimizeResult run =
            minimize_box(value, gradient, std::move(x0), box, cfg.max_iters, cfg.grad_tol);
        // variable-projection polish, then a short second descent
        Eigen::VectorXd polished = solve_linear_weights(run.x, data, shape, box);
        if (value(polished) < run.f) {
            run = minimize_box(value, gradient, std::move(polished), box,
                               std::max(cfg.max_iters / 4, 20), cfg.grad_tol);
        }
        if (run.f < best.f) best = std::move(run);
    }

    FitResult result;
    result.restarts_used = cfg.restarts;

    // never report a fit worse than the constant model at the sample mean
    FitResult baseline = constant_result(data, box, cfg.restarts, cfg.grad_tol);
    if (!(best.f <= baseline.sse)) return baseline;

    NetworkParams fitted(shape, best.x);
    NetworkParams pruned = prune_units(fitted, cfg.prune_threshold);
    if (pruned.shape.h == 0) {
        FitResult flat = constant_result(data, box, cfg.restarts, cfg.grad_tol);
        double c = pruned.nu0();
        c = std::min(std::max(c, box.lower[0]), box.upper[0]);
        flat.theta_hat = NetworkParams::constant_fit(pruned.shape, c);
        flat.sse = (data.x.array() - c).square().sum();
        flat.grad_norm = std::abs(-2.0 * (data.x.array() - c).sum());
        flat.converged = flat.grad_norm <= cfg.grad_tol;
        return flat;
    }

    NetworkParams canon = canonicalize(pruned);
    ParameterBox final_box = box;
    if (pruned.shape.h < shape.h)
        final_box = ParameterBox::symmetric(pruned.shape.param_dim(), cfg.default_box_half_width);

    auto final_value = [&](const Eigen::VectorXd& theta) {
        return sse_loss(NetworkParams(canon.shape, theta), data);
    };
    auto final_gradient = [&](const Eigen::VectorXd& theta) {
        return grad_loss(NetworkParams(canon.shape, theta), data);
    };
    // short polish at the canonical point; also yields the convergence check
    BoxMinimizeResult polish = minimize_box(final_value, final_gradient,
                                            final_box.project(canon.theta), final_box,
                                            std::max(cfg.max_iters / 4, 20), cfg.grad_tol);
    NetworkParams final_params(canon.shape, polish.x);
    final_params = prune_units(final_params, cfg.prune_threshold);
    if (final_params.shape.h > 0) final_params = canonicalize(final_params);

    result.theta_hat = final_params;
    result.sse = sse_loss(final_params, data);
    result.grad_norm = grad_loss(final_params, data).norm();
    result.converged = polish.converged;
    if (result.sse > baseline.sse) return baseline;
    return result;
}

}  // namespace nlcp
