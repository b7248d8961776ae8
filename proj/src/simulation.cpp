#include "nlcp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlcp/parallel.hpp"
#include "nlcp/rng.hpp"

namespace nlcp {

const char* to_string(Family family) {
    switch (family) {
        case Family::gar1: return "GAR1";
        case Family::gar2: return "GAR2";
        case Family::gar3: return "GAR3";
        case Family::gar4: return "GAR4";
        case Family::ar1: return "AR1";
        case Family::ar2: return "AR2";
        case Family::tar1: return "TAR1";
        case Family::tar2: return "TAR2";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    if (name == "GAR1") return Family::gar1;
    if (name == "GAR2") return Family::gar2;
    if (name == "GAR3") return Family::gar3;
    if (name == "GAR4") return Family::gar4;
    if (name == "AR1") return Family::ar1;
    if (name == "AR2") return Family::ar2;
    if (name == "TAR1") return Family::tar1;
    if (name == "TAR2") return Family::tar2;
    throw std::invalid_argument("unknown scenario family: " + name);
}

int family_lag_order(Family) { return 1; }

namespace {

double gar(double x, double mu, double alpha, double beta) {
    return mu + alpha / (1.0 + std::exp(0.5 * (1.0 + beta * x)));
}

}  // namespace

double scenario_g(Family family, int regime, double x) {
    if (regime != 1 && regime != 2) throw std::invalid_argument("scenario_g: regime must be 1 or 2");
    switch (family) {
        case Family::gar1:
            return regime == 1 ? gar(x, 0.5, 1.0, 0.7) : gar(x, 0.1, 1.0, 0.7);
        case Family::gar2:
            return regime == 1 ? gar(x, 0.5, 1.0, 0.7) : gar(x, 0.5, -1.0, 0.7);
        case Family::gar3:
            return regime == 1 ? gar(x, 0.5, 1.0, 0.7) : gar(x, 0.5, 1.0, -0.7);
        case Family::gar4:
            return regime == 1 ? gar(x, 0.5, 1.0, 0.7) : gar(x, 0.5, -1.0, -0.7);
        case Family::ar1:
            return regime == 1 ? 0.3 * x : 0.5 + 0.1 * x;
        case Family::ar2:
            return regime == 1 ? 0.3 * x : 1.0 - 0.1 * x;
        case Family::tar1:
            if (regime == 1) return x >= 0.0 ? 0.3 * x : -0.1 * x;
            return x >= 0.0 ? 0.5 + 0.5 * x : -0.3 * x;
        case Family::tar2:
            if (regime == 1) return x >= 0.0 ? 0.3 * x : -0.1 * x;
            return x >= 0.0 ? 1.0 - 0.1 * x : 0.5 + 0.1 * x;
    }
    throw std::logic_error("scenario_g: unreachable");
}

void ScenarioSpec::validate() const {
    if (n < 2) throw std::invalid_argument("ScenarioSpec: n must be >= 2");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("ScenarioSpec: tau must be in (0,1]");
    if (burn_in < 100) throw std::invalid_argument("ScenarioSpec: burn_in must be >= 100");
}

Eigen::VectorXd generate(const ScenarioSpec& spec) {
    spec.validate();
    const int p = family_lag_order(spec.family);
    const int n = spec.n;
    const int m = spec.change_index();
    auto rng = make_rng(spec.seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::VectorXd raw(n + p);
    auto run_segment = [&](int regime, int keep, double* out) {
        double x = 0.0;
        for (int t = 0; t < spec.burn_in; ++t)
            x = scenario_g(spec.family, regime, x) + gauss(rng);
        for (int t = 0; t < keep; ++t) {
            x = scenario_g(spec.family, regime, x) + gauss(rng);
            out[t] = x;
        }
    };

    if (spec.coupling == Coupling::independent_segments) {
        run_segment(1, m + p, raw.data());
        if (m < n) run_segment(2, n - m, raw.data() + m + p);
        return raw;
    }

    // continuous path: one recursion, regime switches after index m
    double x = 0.0;
    for (int t = 0; t < spec.burn_in; ++t) x = scenario_g(spec.family, 1, x) + gauss(rng);
    for (int i = 0; i < n + p; ++i) {
        int t = i - p + 1;  // renumbered time of this observation
        x = scenario_g(spec.family, t <= m ? 1 : 2, x) + gauss(rng);
        raw[i] = x;
    }
    return raw;
}

PathGenerator stationary_path_generator(Family family, int regime, int burn_in) {
    if (burn_in < 100) throw std::invalid_argument("stationary_path_generator: burn_in >= 100");
    return [family, regime, burn_in](int len, std::mt19937_64& rng) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd out(len);
        double x = 0.0;
        for (int t = 0; t < burn_in; ++t) x = scenario_g(family, regime, x) + gauss(rng);
        for (int t = 0; t < len; ++t) {
            x = scenario_g(family, regime, x) + gauss(rng);
            out[t] = x;
        }
        return out;
    };
}

namespace {

const char* test_kind_name(ARule rule) {
    switch (rule) {
        case ARule::residual: return "T_residual";
        case ARule::ablock: return "T_a";
        case ARule::omnibus: return "T_omnibus";
        case ARule::file_matrix: return "T_file";
    }
    return "T_unknown";
}

}  // namespace

std::vector<PowerRow> power_study(const ScenarioSpec& base, int reps,
                                  const PowerStudyConfig& cfg) {
    base.validate();
    if (reps < 1) throw std::invalid_argument("power_study: reps must be >= 1");
    const int p = family_lag_order(base.family);
    const NetworkShape shape{p, 0, cfg.h};

    // warm the quantile tables outside the replication loop
    CriticalValueOptions cv_warm = cfg.cv;
    cv_warm.threads = cfg.threads;
    for (ARule rule : cfg.tests)
        (void)critical_value(bridge_rank(rule, shape), cfg.weight, cfg.level, cv_warm);
    CriticalValueOptions cv_serial = cfg.cv;
    cv_serial.threads = 1;

    const std::size_t n_tests = cfg.tests.size();
    std::vector<signed char> outcome(static_cast<std::size_t>(reps) * n_tests, -1);

    parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t rep) {
        ScenarioSpec spec = base;
        spec.seed = base.seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1));
        FitConfig fit_cfg = cfg.fit;
        std::uint64_t stream = spec.seed;
        fit_cfg.seed = splitmix64(stream);
        try {
            Eigen::VectorXd raw = generate(spec);
            RegressionDataset data = embed_series(raw, std::nullopt, shape);
            FitResult fit = fit_network(data, fit_cfg);
            SplitCovariance split = split_covariance(data, fit, fit_cfg);
            const NetworkShape fitted_shape = fit.theta_hat.shape;
            for (std::size_t j = 0; j < n_tests; ++j) {
                try {
                    WeightMatrix a = build_test_matrix(cfg.tests[j], split.estimate, fitted_shape);
                    TestStatistic t = test_statistic(data, fit.theta_hat, a, cfg.weight);
                    double crit = critical_value(bridge_rank(cfg.tests[j], fitted_shape),
                                                 cfg.weight, cfg.level, cv_serial);
                    outcome[rep * n_tests + j] = t.value > crit ? 1 : 0;
                } catch (const std::exception&) {
                    outcome[rep * n_tests + j] = -1;
                }
            }
        } catch (const std::exception&) {
            // full-replication failure: every test stays at -1
        }
    });

    std::vector<PowerRow> rows;
    rows.reserve(n_tests);
    for (std::size_t j = 0; j < n_tests; ++j) {
        PowerRow row;
        row.scenario = to_string(base.family);
        row.test_kind = test_kind_name(cfg.tests[j]);
        row.n = base.n;
        row.tau = base.tau;
        row.level = cfg.level;
        for (int rep = 0; rep < reps; ++rep) {
            signed char o = outcome[static_cast<std::size_t>(rep) * n_tests + j];
            if (o < 0) {
                ++row.failures;
            } else {
                ++row.reps;
                row.rejections += o;
            }
        }
        row.rate = row.reps > 0 ? static_cast<double>(row.rejections) / row.reps : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

RepresentativeResult estimate_theta_representative(const ScenarioSpec& base, int big_n,
                                                   int m_reps, int h, const FitConfig& fit_cfg,
                                                   int threads) {
    base.validate();
    if (m_reps < 10) throw std::invalid_argument("estimate_theta_representative: m_reps >= 10");
    const int p = family_lag_order(base.family);
    const NetworkShape shape{p, 0, h};
    if (big_n <= 2 * shape.param_dim())
        throw std::invalid_argument("estimate_theta_representative: big_n too small");

    std::vector<RegressionDataset> data(static_cast<std::size_t>(m_reps));
    std::vector<FitResult> fits(static_cast<std::size_t>(m_reps));
    std::vector<unsigned char> ok(static_cast<std::size_t>(m_reps), 0);

    parallel_for(static_cast<std::size_t>(m_reps), threads, [&](std::size_t r) {
        ScenarioSpec spec = base;
        spec.n = big_n;
        spec.seed = base.seed ^ (0x9e3779b97f4a7c15ULL * (r + 1));
        FitConfig cfg = fit_cfg;
        std::uint64_t stream = spec.seed;
        cfg.seed = splitmix64(stream);
        try {
            data[r] = embed_series(generate(spec), std::nullopt, shape);
            fits[r] = fit_network(data[r], cfg);
            ok[r] = 1;
        } catch (const std::exception&) {
            ok[r] = 0;
        }
    });

    std::vector<int> good;
    for (int r = 0; r < m_reps; ++r)
        if (ok[static_cast<std::size_t>(r)]) good.push_back(r);
    const int m = static_cast<int>(good.size());
    if (m <= m_reps / 2)
        throw std::runtime_error("estimate_theta_representative: more than half of fits failed");

    // median-sse representative (averaging parameters across symmetry orbits
    // would be meaningless)
    std::vector<int> by_sse = good;
    std::sort(by_sse.begin(), by_sse.end(), [&](int l, int r) {
        return fits[static_cast<std::size_t>(l)].sse < fits[static_cast<std::size_t>(r)].sse;
    });
    int median_idx = by_sse[static_cast<std::size_t>((m - 1) / 2)];

    // V-hat: average over fit pairs of the mean squared function difference on
    // held-out replicate paths
    double pair_sum = 0.0;
    long pair_count = 0;
    std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(m));
    for (int ii = 0; ii < m; ++ii) {
        int i = good[static_cast<std::size_t>(ii)];
        for (int rr = 0; rr < m; ++rr)
            values[static_cast<std::size_t>(rr)] =
                eval_network(fits[static_cast<std::size_t>(good[static_cast<std::size_t>(rr)])].theta_hat,
                             data[static_cast<std::size_t>(i)].y);
        for (int rr = 0; rr < m; ++rr) {
            if (good[static_cast<std::size_t>(rr)] == i) continue;
            for (int ss = rr + 1; ss < m; ++ss) {
                if (good[static_cast<std::size_t>(ss)] == i) continue;
                double msd = (values[static_cast<std::size_t>(rr)] - values[static_cast<std::size_t>(ss)])
                                 .squaredNorm() /
                             static_cast<double>(big_n);
                pair_sum += msd / static_cast<double>(m - 2);
                ++pair_count;
            }
        }
    }
    RepresentativeResult out;
    out.theta_tilde = fits[static_cast<std::size_t>(median_idx)].theta_hat;
    out.n_used = big_n;
    out.v_hat = pair_sum * 2.0 / (static_cast<double>(m) * (m - 1));
    out.fit_failures = m_reps - m;
    return out;
}

DistStudyResult estimator_distribution_study(const ScenarioSpec& spec, int m_reps,
                                             const DistStudyConfig& cfg) {
    spec.validate();
    if (!(spec.tau > 0.0 && spec.tau < 1.0))
        throw std::invalid_argument("estimator_distribution_study: requires a change (tau in (0,1))");
    if (m_reps < 1) throw std::invalid_argument("estimator_distribution_study: m_reps >= 1");
    const int p = family_lag_order(spec.family);
    const NetworkShape shape{p, 0, cfg.h};
    const int m = spec.change_index();

    DistStudyResult out;

    // finite-sample side
    std::vector<int> errors(static_cast<std::size_t>(m_reps), 0);
    std::vector<unsigned char> ok(static_cast<std::size_t>(m_reps), 0);
    parallel_for(static_cast<std::size_t>(m_reps), cfg.threads, [&](std::size_t rep) {
        ScenarioSpec s = spec;
        s.seed = spec.seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1));
        FitConfig fit_cfg = cfg.fit;
        std::uint64_t stream = s.seed;
        fit_cfg.seed = splitmix64(stream);
        try {
            RegressionDataset data = embed_series(generate(s), std::nullopt, shape);
            FitResult fit = fit_network(data, fit_cfg);
            WeightMatrix a;
            if (cfg.rule == ARule::residual) {
                // scale-free for the argmax; no covariance needed
                a = residual_matrix_a(fit.theta_hat.shape.param_dim());
            } else {
                SplitCovariance split = split_covariance(data, fit, fit_cfg);
                a = build_test_matrix(cfg.rule, split.estimate, fit.theta_hat.shape);
            }
            ChangePointEstimate est = change_point_estimate(data, fit.theta_hat, a, cfg.weight);
            errors[rep] = est.k_hat - m;
            ok[rep] = 1;
        } catch (const std::exception&) {
            ok[rep] = 0;
        }
    });
    for (int rep = 0; rep < m_reps; ++rep) {
        if (ok[static_cast<std::size_t>(rep)])
            out.mhat_minus_m.push_back(errors[static_cast<std::size_t>(rep)]);
        else
            ++out.fit_failures;
    }

    // limit side, at the representative parameter
    ScenarioSpec rep_spec = spec;
    rep_spec.seed = spec.seed ^ 0xABCDEF12345ULL;
    out.representative = estimate_theta_representative(rep_spec, cfg.rep_big_n, cfg.rep_m, cfg.h,
                                                       cfg.fit, cfg.threads);
    const NetworkParams& theta_tilde = out.representative.theta_tilde;
    PathGenerator pre = stationary_path_generator(spec.family, 1, spec.burn_in);
    PathGenerator post = stationary_path_generator(spec.family, 2, spec.burn_in);
    out.magnitude = change_magnitude_d(pre, post, theta_tilde, spec.tau, cfg.mc_n,
                                       spec.seed ^ 0x5A5A5A5AULL);

    LimitLawSpec law;
    law.d_vec = out.magnitude.d_vec;
    law.lambda = spec.tau;
    law.gamma = cfg.weight.gamma;
    law.horizon = cfg.horizon;
    law.xi_pre = model_xi_sampler(pre, theta_tilde, out.magnitude.mean_pre);
    law.xi_post = model_xi_sampler(post, theta_tilde, out.magnitude.mean_post);
    if (cfg.rule == ARule::residual) {
        law.a = residual_matrix_a(theta_tilde.shape.param_dim());
    } else {
        // population-side matrix from one long realization at the representative
        ScenarioSpec long_spec = spec;
        long_spec.n = std::max(5000, 4 * spec.n);
        long_spec.seed = spec.seed ^ 0x77777777ULL;
        RegressionDataset long_data = embed_series(generate(long_spec), std::nullopt, shape);
        FitConfig fit_cfg = cfg.fit;
        FitResult long_fit = fit_network(long_data, fit_cfg);
        SplitCovariance split = split_covariance(long_data, long_fit, fit_cfg);
        law.a = build_test_matrix(cfg.rule, split.estimate, long_fit.theta_hat.shape);
    }
    out.limit = simulate_limit_argmax(law, cfg.limit_reps, spec.seed ^ 0x1111111ULL, cfg.threads);
    out.ks_distance = ks_distance(out.mhat_minus_m, out.limit.draws);
    return out;
}

double ks_distance(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::vector<int> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
        int next;
        if (i >= sa.size()) next = sb[j];
        else if (j >= sb.size()) next = sa[i];
        else next = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == next) ++i;
        while (j < sb.size() && sb[j] == next) ++j;
        double fa = static_cast<double>(i) / sa.size();
        double fb = static_cast<double>(j) / sb.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_two_sample_p_value(const std::vector<int>& a, const std::vector<int>& b) {
    double d = ks_distance(a, b);
    double n_eff = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    double t = (std::sqrt(n_eff) + 0.12 + 0.11 / std::sqrt(n_eff)) * d;
    // asymptotic Kolmogorov tail; conservative for discrete data
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * t * t);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

}  // namespace nlcp
