#include "oca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace oca {

double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::domain_error("rmse of an empty sequence");
  double ss = 0.0;
  for (double e : estimates) ss += (e - truth) * (e - truth);
  return std::sqrt(ss / static_cast<double>(estimates.size()));
}

double brier_score(const Eigen::MatrixXd& forecasts, std::span<const int> truth) {
  if (static_cast<std::size_t>(forecasts.rows()) != truth.size() || truth.empty()) {
    throw std::domain_error("need one forecast row per truth label");
  }
  double total = 0.0;
  for (Eigen::Index t = 0; t < forecasts.rows(); ++t) {
    if (std::abs(forecasts.row(t).sum() - 1.0) > 1e-9) {
      throw std::domain_error("forecast row " + std::to_string(t) + " does not sum to 1");
    }
    const int observed = truth[static_cast<std::size_t>(t)];
    if (observed < 0 || observed >= forecasts.cols()) {
      throw std::domain_error("truth label outside the forecast classes");
    }
    for (Eigen::Index j = 0; j < forecasts.cols(); ++j) {
      const double d = forecasts(t, j) - (j == observed ? 1.0 : 0.0);
      total += d * d;
    }
  }
  return total / static_cast<double>(forecasts.rows());
}

double crps_empirical(std::span<const double> sample, double y) {
  if (sample.empty()) throw std::domain_error("crps of an empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const auto m = static_cast<double>(x.size());
  double to_obs = 0.0;
  double spread = 0.0;  // sum over i < j of x_j - x_i
  for (std::size_t i = 0; i < x.size(); ++i) {
    to_obs += std::abs(x[i] - y);
    spread += x[i] * (2.0 * static_cast<double>(i) - m + 1.0);
  }
  return to_obs / m - spread / (m * m);
}

}  // namespace oca
