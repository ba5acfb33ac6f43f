#pragma once

#include <Eigen/Dense>

#include <span>

namespace oca {

/// sqrt(mean((estimate - truth)^2)). Throws std::domain_error on empty input.
double rmse(std::span<const double> estimates, double truth);

/// Mean over sites of the squared distance between each forecast row and the
/// one-hot truth. Rows must sum to 1 within 1e-9.
double brier_score(const Eigen::MatrixXd& forecasts, std::span<const int> truth);

/// CRPS of the empirical distribution of `sample` at `y`, computed exactly as
/// mean|X - y| - mean|X - X'| / 2 in O(m log m).
double crps_empirical(std::span<const double> sample, double y);

}  // namespace oca
