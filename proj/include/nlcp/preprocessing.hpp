#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace nlcp {

// Simple returns r_t = (y_t - y_{t-1}) / y_{t-1}; prices must be positive.
Eigen::VectorXd returns(const Eigen::VectorXd& prices);

// Variance-stabilizing map of squared returns; finite for every r when
// rho > 0:  x_t = log(r_t^2 + rho*s2) - rho*s2 / (r_t^2 + rho*s2),
// with s2 the sample variance of the returns.
Eigen::VectorXd fuller_transform(const Eigen::VectorXd& r, double rho);

inline constexpr double default_fuller_rho = 0.02;

enum class OrderSplit { first_segment, last_segment, both_min };

// Linear AR(k) order choice by AIC = n log(RSS/n) + 2k over k = 0..max_p,
// fitted by least squares on a segment of `segment_len` points (the full
// series when shorter). both_min evaluates the first and last segment and
// returns the smaller order.
int select_ar_order(const Eigen::VectorXd& series, int max_p, OrderSplit split,
                    int segment_len = 600);

// One numeric column (optional header) or two columns date,value; any later
// unparseable row aborts with its line number.
Eigen::VectorXd read_series_csv(const std::filesystem::path& file);

}  // namespace nlcp
