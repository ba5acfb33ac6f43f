#pragma once

#include <span>
#include <utility>
#include <vector>

namespace oca::detail {

/// Sums weights over all labelings of the free slots of a conditioning
/// window, bucketed by the site label (slot 0) and by the number of agreeing
/// neighbor pairs.
///
/// Slots [0, free_count) are free; slot s >= free_count carries the fixed
/// label fixed_labels[s - free_count]. Optional `weights` hold free_count rows
/// of k per-label factors; a labeling's weight is the product over free slots.
/// Agreement counts are integers, so the table is independent of beta and one
/// enumeration serves every beta.
class WindowSum {
 public:
  void run(int k, int free_count, std::span<const std::pair<int, int>> pairs,
           std::span<const int> fixed_labels, std::span<const double> weights = {});

  int k() const noexcept { return k_; }
  int columns() const noexcept { return columns_; }
  /// Weight mass with slot 0 labelled `label`, one entry per agreement count.
  std::span<const double> row(int label) const {
    return {table_.data() + static_cast<std::size_t>(label * columns_),
            static_cast<std::size_t>(columns_)};
  }

 private:
  void descend(int depth, int count, double weight);

  int k_ = 0;
  int free_count_ = 0;
  int columns_ = 0;
  std::vector<double> table_;
  std::vector<int> unary_;           // free_count x k fixed-neighbor agreements
  std::vector<int> earlier_offset_;  // CSR of free-slot neighbors below each slot
  std::vector<int> earlier_;
  std::vector<int> labels_;
  std::span<const double> weights_;
};

/// log sum_c counts[c] * exp(beta * c); -inf when every count is zero.
double log_weighted_sum(std::span<const double> counts, double beta);

/// log(exp(a) + exp(b)) safe for -inf operands.
double log_add(double a, double b);

}  // namespace oca::detail
