#pragma once

#include <filesystem>
#include <optional>

#include "nlcp/changepoint.hpp"
#include "nlcp/covariance.hpp"
#include "nlcp/critical_values.hpp"

namespace nlcp {

// One fitted dataset with its score path and covariance estimate; tests and
// estimates for different A rules reuse it.
struct AnalysisContext {
    FitResult fit;
    ScorePath path;
    CovEstimate cov;
    std::optional<int> split_k0;
};

AnalysisContext analyze_dataset(const RegressionDataset& data, const FitConfig& fit_cfg,
                                CovKind cov_kind = CovKind::split, int hac_bandwidth = -1);

struct TestEvalConfig {
    WeightConfig weight;
    ARule rule = ARule::omnibus;
    double level = 0.05;
    CriticalValueOptions cv;
    std::optional<WeightMatrix> file_matrix;  // required when rule == file_matrix
};

// Builds A from the context covariance, computes T_n, and compares it with
// the bridge critical value at the matching rank.
TestReport evaluate_test(const AnalysisContext& ctx, const TestEvalConfig& cfg);

ChangePointEstimate evaluate_estimate(const AnalysisContext& ctx, ARule rule,
                                      const WeightConfig& weight,
                                      const std::optional<WeightMatrix>& file_matrix = {});

// Whitespace/comma separated q x q symmetric PSD matrix.
WeightMatrix load_weight_matrix(const std::filesystem::path& file, int q);

}  // namespace nlcp
