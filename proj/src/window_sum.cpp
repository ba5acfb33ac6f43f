#include "oca/window_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oca::detail {

void WindowSum::run(int k, int free_count, std::span<const std::pair<int, int>> pairs,
                    std::span<const int> fixed_labels, std::span<const double> weights) {
  k_ = k;
  free_count_ = free_count;
  weights_ = weights;

  int base = 0;
  unary_.assign(static_cast<std::size_t>(free_count * k), 0);
  std::vector<int> earlier_count(static_cast<std::size_t>(free_count), 0);
  int free_pairs = 0;
  for (const auto& [a, b] : pairs) {
    if (b < free_count) {
      ++earlier_count[static_cast<std::size_t>(b)];
      ++free_pairs;
    } else if (a < free_count) {
      ++unary_[static_cast<std::size_t>(a * k + fixed_labels[static_cast<std::size_t>(b - free_count)])];
    } else if (fixed_labels[static_cast<std::size_t>(a - free_count)] ==
               fixed_labels[static_cast<std::size_t>(b - free_count)]) {
      ++base;
    }
  }
  earlier_offset_.assign(static_cast<std::size_t>(free_count) + 1, 0);
  for (int s = 0; s < free_count; ++s) {
    earlier_offset_[static_cast<std::size_t>(s) + 1] =
        earlier_offset_[static_cast<std::size_t>(s)] + earlier_count[static_cast<std::size_t>(s)];
  }
  earlier_.assign(static_cast<std::size_t>(free_pairs), 0);
  std::fill(earlier_count.begin(), earlier_count.end(), 0);
  for (const auto& [a, b] : pairs) {
    if (b < free_count) {
      const auto at = static_cast<std::size_t>(earlier_offset_[static_cast<std::size_t>(b)] +
                                               earlier_count[static_cast<std::size_t>(b)]++);
      earlier_[at] = a;
    }
  }

  columns_ = static_cast<int>(pairs.size()) + 1;
  table_.assign(static_cast<std::size_t>(k * columns_), 0.0);
  labels_.assign(static_cast<std::size_t>(free_count), 0);
  if (free_count == 0) return;
  descend(0, base, 1.0);
}

void WindowSum::descend(int depth, int count, double weight) {
  const int begin = earlier_offset_[static_cast<std::size_t>(depth)];
  const int end = earlier_offset_[static_cast<std::size_t>(depth) + 1];
  const bool last = depth + 1 == free_count_;
  for (int label = 0; label < k_; ++label) {
    double w = weight;
    if (!weights_.empty()) {
      w *= weights_[static_cast<std::size_t>(depth * k_ + label)];
      if (w == 0.0) continue;
    }
    int c = count + unary_[static_cast<std::size_t>(depth * k_ + label)];
    for (int e = begin; e < end; ++e) {
      c += labels_[static_cast<std::size_t>(earlier_[static_cast<std::size_t>(e)])] == label;
    }
    labels_[static_cast<std::size_t>(depth)] = label;
    if (last) {
      table_[static_cast<std::size_t>(labels_[0] * columns_ + c)] += w;
    } else {
      descend(depth + 1, c, w);
    }
  }
}

double log_weighted_sum(std::span<const double> counts, double beta) {
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0.0) peak = std::max(peak, std::log(counts[c]) + beta * static_cast<double>(c));
  }
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0.0) sum += std::exp(std::log(counts[c]) + beta * static_cast<double>(c) - peak);
  }
  return peak + std::log(sum);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace oca::detail
