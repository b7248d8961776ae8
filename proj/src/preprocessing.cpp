#include "nlcp/preprocessing.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <vector>

#include "nlcp/errors.hpp"

namespace nlcp {

Eigen::VectorXd returns(const Eigen::VectorXd& prices) {
    if (prices.size() < 2) throw TooShortError("returns: need at least two prices");
    if (!(prices.array() > 0.0).all())
        throw std::invalid_argument("returns: prices must be strictly positive");
    const Eigen::Index n = prices.size() - 1;
    Eigen::VectorXd r(n);
    for (Eigen::Index t = 0; t < n; ++t) r[t] = (prices[t + 1] - prices[t]) / prices[t];
    return r;
}

Eigen::VectorXd fuller_transform(const Eigen::VectorXd& r, double rho) {
    if (rho < 0.0) throw std::invalid_argument("fuller_transform: rho must be >= 0");
    if (r.size() < 2) throw TooShortError("fuller_transform: need at least two returns");
    double mean = r.mean();
    double s2 = (r.array() - mean).square().sum() / static_cast<double>(r.size() - 1);
    if (rho > 0.0 && !(s2 > 0.0))
        throw std::invalid_argument("fuller_transform: returns have zero variance");
    const double c = rho * s2;
    Eigen::VectorXd x(r.size());
    for (Eigen::Index t = 0; t < r.size(); ++t) {
        double u = r[t] * r[t] + c;
        if (!(u > 0.0))
            throw NonFiniteError("fuller_transform: zero return with rho = 0 gives log(0)");
        x[t] = std::log(u) - c / u;
    }
    return x;
}

namespace {

// AICs are compared on a common effective sample: all candidate orders drop
// the same max_p initial observations.
int aic_order(const Eigen::VectorXd& segment, int max_p) {
    const int len = static_cast<int>(segment.size());
    const int n_fit = len - max_p;
    if (n_fit <= max_p + 1)
        throw TooShortError("select_ar_order: segment too short for max_p");

    double best_aic = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k <= max_p; ++k) {
        Eigen::MatrixXd design(n_fit, k + 1);
        design.col(0).setOnes();
        Eigen::VectorXd y(n_fit);
        for (int t = 0; t < n_fit; ++t) {
            int idx = max_p + t;
            y[t] = segment[idx];
            for (int j = 0; j < k; ++j) design(t, 1 + j) = segment[idx - 1 - j];
        }
        Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
        double rss = (y - design * coef).squaredNorm();
        double aic = n_fit * std::log(std::max(rss, 1e-300) / n_fit) + 2.0 * k;
        if (aic < best_aic) {
            best_aic = aic;
            best_k = k;
        }
    }
    return best_k;
}

}  // namespace

int select_ar_order(const Eigen::VectorXd& series, int max_p, OrderSplit split, int segment_len) {
    if (max_p < 0) throw std::invalid_argument("select_ar_order: max_p must be >= 0");
    if (segment_len < 1) throw std::invalid_argument("select_ar_order: segment_len must be >= 1");
    const int len = static_cast<int>(series.size());
    if (len <= 2 * max_p) throw TooShortError("select_ar_order: series shorter than 2*max_p");
    const int seg = std::min(segment_len, len);

    switch (split) {
        case OrderSplit::first_segment:
            return aic_order(series.head(seg), max_p);
        case OrderSplit::last_segment:
            return aic_order(series.tail(seg), max_p);
        case OrderSplit::both_min:
            return std::min(aic_order(series.head(seg), max_p), aic_order(series.tail(seg), max_p));
    }
    throw std::logic_error("select_ar_order: unreachable");
}

Eigen::VectorXd read_series_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open input file: " + file.string());
    std::vector<double> values;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string field = line;
        auto comma = line.rfind(',');
        if (comma != std::string::npos) field = line.substr(comma + 1);
        const char* begin = field.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        bool parsed = end != begin && end != nullptr;
        if (parsed)
            while (*end == ' ' || *end == '\t') ++end;
        parsed = parsed && *end == '\0' && std::isfinite(v);
        if (!parsed) {
            if (line_no == 1) continue;  // header row
            throw ParseError("unparseable value at line " + std::to_string(line_no) + " of " +
                             file.string());
        }
        values.push_back(v);
    }
    if (values.empty()) throw ParseError("no numeric rows in " + file.string());
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace nlcp
