#include "nlcp/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <vector>

#include "nlcp/errors.hpp"
#include "nlcp/parallel.hpp"
#include "nlcp/rng.hpp"

namespace nlcp {

namespace {

// |zeta(1/2)| / sqrt(2*pi): continuity-correction constant for the expected
// gap between a discretely monitored supremum and the continuous one.
constexpr double kContinuityBeta = 0.5825971579390107;

constexpr int kTableVersion = 1;

std::vector<double> table_levels() {
    std::vector<double> levels;
    levels.reserve(999);
    for (int i = 1; i <= 999; ++i) levels.push_back(i / 1000.0);
    return levels;
}

std::string table_key(int rank, const WeightConfig& cfg, int grid_n, long reps,
                      std::uint64_t seed) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "bridge_r%d_eta%.6g_gamma%.6g_grid%d_reps%ld_seed%llu_v%d",
                  rank, cfg.eta, cfg.gamma, grid_n, reps,
                  static_cast<unsigned long long>(seed), kTableVersion);
    return buf;
}

std::mutex g_table_mutex;
std::map<std::string, QuantileTable> g_table_registry;

bool load_table_file(const std::filesystem::path& file, int rank, const WeightConfig& cfg,
                     int grid_n, long reps, std::uint64_t seed, QuantileTable& out) {
    std::ifstream in(file);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# nlcp bridge sup quantile table", 0) != 0)
        return false;
    QuantileTable table;
    long levels = 0;
    std::string name;
    for (int i = 0; i < 7; ++i) {
        if (!(in >> name)) return false;
        if (name == "rank") in >> table.rank;
        else if (name == "eta") in >> table.eta;
        else if (name == "gamma") in >> table.gamma;
        else if (name == "grid_n") in >> table.grid_n;
        else if (name == "reps") in >> table.reps;
        else if (name == "seed") in >> table.seed;
        else if (name == "levels") in >> levels;
        else return false;
    }
    if (table.rank != rank || table.eta != cfg.eta || table.gamma != cfg.gamma ||
        table.grid_n != grid_n || table.reps != reps || table.seed != seed)
        return false;
    for (long i = 0; i < levels; ++i) {
        double level = 0.0, value = 0.0;
        if (!(in >> level >> value)) return false;
        table.quantiles[level] = value;
    }
    out = std::move(table);
    return true;
}

void store_table_file(const std::filesystem::path& file, const QuantileTable& table) {
    std::filesystem::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open cache file for writing");
        out << "# nlcp bridge sup quantile table v" << kTableVersion << "\n";
        out << "rank " << table.rank << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", table.eta);
        out << "eta " << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.17g", table.gamma);
        out << "gamma " << buf << "\n";
        out << "grid_n " << table.grid_n << "\n";
        out << "reps " << table.reps << "\n";
        out << "seed " << table.seed << "\n";
        out << "levels " << table.quantiles.size() << "\n";
        for (const auto& [level, value] : table.quantiles) {
            std::snprintf(buf, sizeof(buf), "%.4f", level);
            out << buf << ' ';
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            out << buf << "\n";
        }
        if (!out) throw std::runtime_error("cache write failed");
    }
    std::filesystem::rename(tmp, file);
}

}  // namespace

double QuantileTable::quantile(double level) const {
    if (quantiles.empty()) throw std::logic_error("QuantileTable: empty");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("QuantileTable::quantile: level must be in (0,1)");
    auto hi = quantiles.lower_bound(level);
    if (hi == quantiles.end()) return std::prev(hi)->second;
    if (hi->first == level || hi == quantiles.begin()) return hi->second;
    auto lo = std::prev(hi);
    double t = (level - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double QuantileTable::upper_tail_probability(double value) const {
    if (quantiles.empty()) throw std::logic_error("QuantileTable: empty");
    auto first = quantiles.begin();
    auto last = std::prev(quantiles.end());
    if (value <= first->second) return 1.0 - first->first;
    if (value >= last->second) return 1.0 - last->first;
    // walk to the bracketing tabulated quantiles, then interpolate the level
    auto hi = first;
    while (hi != quantiles.end() && hi->second < value) ++hi;
    auto lo = std::prev(hi);
    double span = hi->second - lo->second;
    double t = span > 0.0 ? (value - lo->second) / span : 0.0;
    double level = lo->first + t * (hi->first - lo->first);
    return 1.0 - level;
}

QuantileTable simulate_bridge_sup(int rank, const WeightConfig& cfg, int grid_n, long reps,
                                  std::uint64_t seed, int threads) {
    cfg.validate();
    if (cfg.is_darling_erdos_corner())
        throw UseFiniteSampleCalibration(
            "simulate_bridge_sup: (eta,gamma)=(0,1/2) has no bridge limit; use the "
            "finite-sample bootstrap calibration");
    if (rank < 1) throw std::invalid_argument("simulate_bridge_sup: rank must be >= 1");
    if (grid_n < 1000) throw std::invalid_argument("simulate_bridge_sup: grid_n must be >= 1000");
    if (reps < 1) throw std::invalid_argument("simulate_bridge_sup: reps must be >= 1");

    const double dt = 1.0 / grid_n;
    const double sqrt_dt = std::sqrt(dt);
    std::vector<double> sups(static_cast<std::size_t>(reps));

    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
        auto rng = make_rng(seed, rep);
        std::normal_distribution<double> gauss(0.0, 1.0);
        // cumulative Wiener path, coordinates interleaved per grid point
        static thread_local std::vector<double> w;
        w.assign(static_cast<std::size_t>(grid_n) * rank, 0.0);
        for (int c = 0; c < rank; ++c) {
            double acc = 0.0;
            for (int j = 0; j < grid_n; ++j) {
                acc += sqrt_dt * gauss(rng);
                w[static_cast<std::size_t>(j) * rank + c] = acc;
            }
        }
        const double* w1 = &w[static_cast<std::size_t>(grid_n - 1) * rank];
        double sup = 0.0;
        double weight_at_sup = 0.0;
        for (int j = 1; j < grid_n; ++j) {
            double s = static_cast<double>(j) * dt;
            if (!(s > cfg.eta && s < 1.0 - cfg.eta)) continue;
            const double* wj = &w[static_cast<std::size_t>(j - 1) * rank];
            double norm2 = 0.0;
            for (int c = 0; c < rank; ++c) {
                double b = wj[c] - s * w1[c];
                norm2 += b * b;
            }
            double wgt = cfg.gamma == 0.0 ? 1.0 : std::pow(s * (1.0 - s), -cfg.gamma);
            double val = std::sqrt(norm2) * wgt;
            if (val > sup) {
                sup = val;
                weight_at_sup = wgt;
            }
        }
        sups[rep] = sup + kContinuityBeta * weight_at_sup * sqrt_dt;
    });

    std::sort(sups.begin(), sups.end());
    QuantileTable table;
    table.rank = rank;
    table.eta = cfg.eta;
    table.gamma = cfg.gamma;
    table.grid_n = grid_n;
    table.reps = reps;
    table.seed = seed;
    for (double level : table_levels()) {
        long idx = static_cast<long>(std::ceil(level * reps)) - 1;
        idx = std::max(0L, std::min(idx, reps - 1));
        table.quantiles[level] = sups[static_cast<std::size_t>(idx)];
    }
    return table;
}

const QuantileTable& critical_value_table(int rank, const WeightConfig& cfg,
                                          const CriticalValueOptions& opts) {
    cfg.validate();
    if (cfg.is_darling_erdos_corner())
        throw UseFiniteSampleCalibration(
            "critical_value: (eta,gamma)=(0,1/2) requires finite-sample calibration");
    std::string key = table_key(rank, cfg, opts.grid_n, opts.reps, opts.seed);
    {
        std::lock_guard<std::mutex> lock(g_table_mutex);
        auto it = g_table_registry.find(key);
        if (it != g_table_registry.end()) return it->second;
    }

    QuantileTable table;
    bool loaded = false;
    std::filesystem::path file;
    if (!opts.cache_dir.empty()) {
        file = opts.cache_dir / (key + ".txt");
        loaded = load_table_file(file, rank, cfg, opts.grid_n, opts.reps, opts.seed, table);
    }
    if (!loaded) {
        table = simulate_bridge_sup(rank, cfg, opts.grid_n, opts.reps, opts.seed, opts.threads);
        if (!opts.cache_dir.empty()) {
            try {
                std::filesystem::create_directories(opts.cache_dir);
                store_table_file(file, table);
            } catch (const std::exception& e) {
                std::cerr << "nlcp: warning: cannot write critical-value cache " << file
                          << " (" << e.what() << "); keeping it in memory only\n";
            }
        }
    }
    std::lock_guard<std::mutex> lock(g_table_mutex);
    auto [it, _] = g_table_registry.emplace(key, std::move(table));
    return it->second;
}

double critical_value(int rank, const WeightConfig& cfg, double level,
                      const CriticalValueOptions& opts) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("critical_value: level must be in (0,1)");
    return critical_value_table(rank, cfg, opts).quantile(level);
}

const char* to_string(ARule rule) {
    switch (rule) {
        case ARule::residual: return "residual";
        case ARule::ablock: return "ablock";
        case ARule::omnibus: return "omnibus";
        case ARule::file_matrix: return "file";
    }
    return "unknown";
}

ARule a_rule_from_string(const std::string& name) {
    if (name == "residual") return ARule::residual;
    if (name == "ablock") return ARule::ablock;
    if (name == "omnibus") return ARule::omnibus;
    if (name == "file") return ARule::file_matrix;
    throw std::invalid_argument("unknown A rule: " + name);
}

WeightMatrix build_test_matrix(ARule rule, const CovEstimate& cov, const NetworkShape& shape,
                               double ridge) {
    const int q = shape.param_dim();
    if (cov.matrix.rows() != q)
        throw std::invalid_argument("build_test_matrix: covariance dimension mismatch");
    switch (rule) {
        case ARule::residual: {
            CovEstimate sub;
            sub.matrix = cov.matrix.topLeftCorner(1, 1);
            sub.dof = cov.dof;
            WeightMatrix inv = inverse_psd(sub, ridge);
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
            a(0, 0) = inv.a(0, 0);
            return WeightMatrix(std::move(a));
        }
        case ARule::ablock: {
            const int block = shape.h * shape.input_dim();
            if (block < 1)
                throw std::invalid_argument("build_test_matrix: no a-coordinates for h=0");
            const int offset = 1 + shape.h;
            CovEstimate sub;
            sub.matrix = cov.matrix.block(offset, offset, block, block);
            sub.dof = cov.dof;
            WeightMatrix inv = inverse_psd(sub, ridge);
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q, q);
            a.block(offset, offset, block, block) = inv.a;
            return WeightMatrix(std::move(a));
        }
        case ARule::omnibus:
            return inverse_psd(cov, ridge);
        case ARule::file_matrix:
            throw std::invalid_argument("build_test_matrix: file matrices are loaded, not built");
    }
    throw std::logic_error("build_test_matrix: unreachable");
}

int bridge_rank(ARule rule, const NetworkShape& shape) {
    switch (rule) {
        case ARule::residual: return 1;
        case ARule::ablock: return shape.h * shape.input_dim();
        case ARule::omnibus: return shape.param_dim();
        case ARule::file_matrix:
            throw std::invalid_argument("bridge_rank: rank of a file matrix is its recorded rank");
    }
    throw std::logic_error("bridge_rank: unreachable");
}

double finite_sample_null_quantile(const FitResult& fitted, const RegressionDataset& data,
                                   const WeightConfig& cfg, ARule rule, double level, int reps,
                                   std::uint64_t seed, const FitConfig& fit_cfg, int threads) {
    if (reps < 200) throw std::invalid_argument("finite_sample_null_quantile: reps must be >= 200");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("finite_sample_null_quantile: level must be in (0,1)");
    if (!fitted.converged)
        throw std::invalid_argument("finite_sample_null_quantile: fit did not converge");
    const NetworkParams& theta = fitted.theta_hat;
    const NetworkShape shape = theta.shape;
    const int n = data.n();
    const int p = shape.p;
    const int d = shape.d;

    Eigen::VectorXd residuals = data.x - eval_network(theta, data.y);
    residuals.array() -= residuals.mean();

    std::vector<double> stats(static_cast<std::size_t>(reps),
                              std::numeric_limits<double>::quiet_NaN());
    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rep) {
        auto rng = make_rng(seed, rep);
        std::uniform_int_distribution<int> pick(0, n - 1);
        RegressionDataset boot;
        boot.shape = shape;
        boot.x.resize(n);
        boot.y.resize(n, p + d);
        Eigen::VectorXd lags = p > 0 ? data.y.row(0).head(p).transpose() : Eigen::VectorXd();
        for (int t = 0; t < n; ++t) {
            for (int j = 0; j < p; ++j) boot.y(t, j) = lags[j];
            for (int j = 0; j < d; ++j) boot.y(t, p + j) = data.y(t, p + j);
            double value = eval_network(theta, boot.y.row(t).transpose()) + residuals[pick(rng)];
            boot.x[t] = value;
            if (p > 0) {
                for (int j = p - 1; j > 0; --j) lags[j] = lags[j - 1];
                lags[0] = value;
            }
        }
        FitConfig boot_cfg = fit_cfg;
        std::uint64_t fit_stream = rng();
        boot_cfg.seed = splitmix64(fit_stream);
        try {
            FitResult boot_fit = fit_network(boot, boot_cfg);
            SplitCovariance split = split_covariance(boot, boot_fit, boot_cfg);
            WeightMatrix a = build_test_matrix(rule, split.estimate, boot_fit.theta_hat.shape);
            stats[rep] = test_statistic(boot, boot_fit.theta_hat, a, cfg).value;
        } catch (const std::exception&) {
            // left as NaN and excluded below
        }
    });

    std::vector<double> ok;
    ok.reserve(stats.size());
    for (double v : stats)
        if (std::isfinite(v)) ok.push_back(v);
    if (ok.size() < static_cast<std::size_t>(reps) / 2)
        throw std::runtime_error("finite_sample_null_quantile: too many bootstrap failures");
    std::sort(ok.begin(), ok.end());
    long idx = static_cast<long>(std::ceil(level * static_cast<double>(ok.size()))) - 1;
    idx = std::max(0L, std::min(idx, static_cast<long>(ok.size()) - 1));
    return ok[static_cast<std::size_t>(idx)];
}

}  // namespace nlcp
