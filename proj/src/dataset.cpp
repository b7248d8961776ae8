#include "nlcp/dataset.hpp"

#include "nlcp/errors.hpp"

namespace nlcp {

RegressionDataset RegressionDataset::rows(int start, int len) const {
    if (start < 0 || len < 0 || start + len > n())
        throw std::invalid_argument("RegressionDataset::rows: range out of bounds");
    RegressionDataset out;
    out.x = x.segment(start, len);
    out.y = y.middleRows(start, len);
    out.shape = shape;
    return out;
}

RegressionDataset embed_series(const Eigen::VectorXd& raw,
                               const std::optional<Eigen::MatrixXd>& exogenous,
                               NetworkShape shape) {
    shape.validate();
    const int p = shape.p;
    const int d = shape.d;
    if (raw.size() < p + 2)
        throw TooShortError("embed_series: need at least p+2 observations, got " +
                            std::to_string(raw.size()));
    const int n = static_cast<int>(raw.size()) - p;
    if (d > 0) {
        if (!exogenous)
            throw std::invalid_argument("embed_series: shape.d > 0 but no exogenous matrix given");
        if (exogenous->rows() != n || exogenous->cols() != d)
            throw std::invalid_argument("embed_series: exogenous matrix misaligned with responses");
    }

    RegressionDataset data;
    data.shape = shape;
    data.x = raw.segment(p, n);
    data.y.resize(n, p + d);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < p; ++j) data.y(t, j) = raw[p + t - 1 - j];
    if (d > 0) data.y.rightCols(d) = *exogenous;
    return data;
}

}  // namespace nlcp
