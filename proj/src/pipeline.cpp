#include "nlcp/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "nlcp/errors.hpp"

namespace nlcp {

AnalysisContext analyze_dataset(const RegressionDataset& data, const FitConfig& fit_cfg,
                                CovKind cov_kind, int hac_bandwidth) {
    AnalysisContext ctx;
    ctx.fit = fit_network(data, fit_cfg);
    // regenerate the dataset view against the fitted shape in case units were pruned
    RegressionDataset view = data;
    view.shape = ctx.fit.theta_hat.shape;
    ctx.path = score_partial_sums(view, ctx.fit.theta_hat);
    switch (cov_kind) {
        case CovKind::pooled:
            ctx.cov = pooled_covariance(ctx.path);
            break;
        case CovKind::long_run:
            ctx.cov = long_run_covariance(ctx.path, hac_bandwidth);
            break;
        case CovKind::split: {
            SplitCovariance split = split_covariance(view, ctx.fit, fit_cfg);
            ctx.cov = split.estimate;
            ctx.split_k0 = split.k0;
            break;
        }
    }
    return ctx;
}

namespace {

WeightMatrix resolve_matrix(const AnalysisContext& ctx, ARule rule,
                            const std::optional<WeightMatrix>& file_matrix) {
    if (rule == ARule::file_matrix) {
        if (!file_matrix) throw std::invalid_argument("rule 'file' needs a loaded matrix");
        if (file_matrix->dim() != ctx.path.q())
            throw std::invalid_argument("file matrix dimension does not match the fitted model");
        return *file_matrix;
    }
    return build_test_matrix(rule, ctx.cov, ctx.fit.theta_hat.shape);
}

}  // namespace

TestReport evaluate_test(const AnalysisContext& ctx, const TestEvalConfig& cfg) {
    WeightMatrix a = resolve_matrix(ctx, cfg.rule, cfg.file_matrix);
    TestStatistic stat = test_statistic(ctx.path, a, cfg.weight);
    int rank = cfg.rule == ARule::file_matrix ? std::max(a.rank, 1)
                                              : bridge_rank(cfg.rule, ctx.fit.theta_hat.shape);
    const QuantileTable& table = critical_value_table(rank, cfg.weight, cfg.cv);

    TestReport report;
    report.statistic = stat.value;
    report.k_argmax = stat.k_argmax;
    report.weight = cfg.weight;
    report.a_used = std::move(a);
    report.level = cfg.level;
    report.critical_value = table.quantile(cfg.level);
    report.rejected = stat.value > report.critical_value;
    report.p_value = table.upper_tail_probability(stat.value);
    return report;
}

ChangePointEstimate evaluate_estimate(const AnalysisContext& ctx, ARule rule,
                                      const WeightConfig& weight,
                                      const std::optional<WeightMatrix>& file_matrix) {
    return change_point_estimate(ctx.path, resolve_matrix(ctx, rule, file_matrix), weight);
}

WeightMatrix load_weight_matrix(const std::filesystem::path& file, int q) {
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open matrix file: " + file.string());
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        for (char& c : token)
            if (c == ',') c = ' ';
        std::istringstream fields(token);
        double v;
        while (fields >> v) values.push_back(v);
    }
    if (static_cast<int>(values.size()) != q * q)
        throw ParseError("matrix file " + file.string() + ": expected " + std::to_string(q * q) +
                         " entries, found " + std::to_string(values.size()));
    Eigen::MatrixXd m(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) m(i, j) = values[static_cast<std::size_t>(i) * q + j];
    return WeightMatrix(std::move(m));
}

}  // namespace nlcp
