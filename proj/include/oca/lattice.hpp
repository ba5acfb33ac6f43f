#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "oca/parallel.hpp"

namespace oca {

/// Up to four first-order neighbors of a site, in ascending site order.
struct Neighbors {
  std::array<int, 4> sites{};
  int count = 0;

  const int* begin() const { return sites.data(); }
  const int* end() const { return sites.data() + count; }
  int size() const { return count; }
};

/// Rectangular grid with lexicographic (row-major) site ordering. Sites,
/// rows and columns are 0-based.
class Lattice {
 public:
  Lattice(int rows, int cols);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int size() const noexcept { return rows_ * cols_; }

  /// Ordering index of (row, col). Throws std::domain_error when out of range.
  int index(int row, int col) const;
  int row(int site) const noexcept { return site / cols_; }
  int col(int site) const noexcept { return site % cols_; }

  /// Up/down/left/right neighbors clipped at the grid edges.
  Neighbors neighbors(int site) const;
  bool adjacent(int a, int b) const noexcept;

  /// Number of unordered first-order neighbor pairs, 2*n1*n2 - n1 - n2.
  int pair_count() const noexcept { return rows_ * (cols_ - 1) + cols_ * (rows_ - 1); }

  /// Squared Euclidean distance between two sites' grid coordinates.
  int squared_distance(int a, int b) const noexcept {
    const int dr = row(a) - row(b);
    const int dc = col(a) - col(b);
    return dr * dr + dc * dc;
  }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int rows_;
  int cols_;
};

/// Conditioning window V_i = g(i) ∪ {i} ∪ f(i) of one site.
///
/// Members are addressed by local slot: slot 0 is the site itself, slots
/// 1..|f| the future set and the remaining slots the past set, each block in
/// ascending site order. Pairs are first-order neighbor pairs inside the
/// window, as (lower slot, higher slot); pairs with both ends in the past
/// block are stored last, starting at `past_pair_begin`.
struct SiteWindow {
  std::vector<int> past;    // g(i)
  std::vector<int> future;  // f(i)
  std::vector<std::pair<int, int>> pairs;
  std::size_t past_pair_begin = 0;

  int slot_count() const noexcept { return 1 + static_cast<int>(past.size() + future.size()); }
  int first_past_slot() const noexcept { return 1 + static_cast<int>(future.size()); }
  /// Site index stored at a local slot.
  int site_at(int slot, int self) const noexcept;

  friend bool operator==(const SiteWindow&, const SiteWindow&) = default;
};

struct PlanOptions {
  // Drop g(i)-g(i) pairs from the observed and latent conditionals, where they
  // contribute a constant factor to numerator and denominator.
  bool prune_past_pairs = false;

  friend bool operator==(const PlanOptions&, const PlanOptions&) = default;
};

/// Per-site conditioning sets for the ordered conditional approximation.
/// Immutable once built; safe to share between threads.
class OcaPlan {
 public:
  OcaPlan(Lattice lattice, int past_size, int future_size, PlanOptions options,
          std::vector<SiteWindow> windows);

  const Lattice& lattice() const noexcept { return lattice_; }
  int size() const noexcept { return lattice_.size(); }
  int past_size() const noexcept { return past_size_; }
  int future_size() const noexcept { return future_size_; }
  const PlanOptions& options() const noexcept { return options_; }

  const SiteWindow& window(int site) const { return windows_.at(static_cast<std::size_t>(site)); }

  /// Pairs entering the observed/latent conditionals of `site`.
  std::span<const std::pair<int, int>> conditional_pairs(int site) const;

  friend bool operator==(const OcaPlan&, const OcaPlan&) = default;

 private:
  Lattice lattice_;
  int past_size_;
  int future_size_;
  PlanOptions options_;
  std::vector<SiteWindow> windows_;
};

/// Builds g(i) as the min(m_g, i) earlier sites nearest to i and f(i) as the
/// min(m_f, n-1-i) later sites nearest to i, in Euclidean grid distance with
/// ties going to the smaller ordering index.
OcaPlan build_oca_plan(const Lattice& lattice, int past_size, int future_size,
                       PlanOptions options = {},
                       const Executor& executor = serial_executor());

/// Plan whose windows span the whole grid (exact conditionals).
OcaPlan build_full_plan(const Lattice& lattice, PlanOptions options = {});

/// Writes one line per site, `i; g(i); f(i)`, 1-based, members comma separated.
void dump_plan(std::ostream& out, const OcaPlan& plan);

}  // namespace oca
