#include "oca/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace oca {

Lattice::Lattice(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw std::domain_error("lattice dimensions must be positive, got " + std::to_string(rows) +
                            "x" + std::to_string(cols));
  }
}

int Lattice::index(int row, int col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw std::domain_error("coordinate (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                            " lattice");
  }
  return row * cols_ + col;
}

Neighbors Lattice::neighbors(int site) const {
  if (site < 0 || site >= size()) {
    throw std::domain_error("site " + std::to_string(site) + " outside lattice");
  }
  Neighbors out;
  const int r = row(site);
  const int c = col(site);
  if (r > 0) out.sites[out.count++] = site - cols_;
  if (c > 0) out.sites[out.count++] = site - 1;
  if (c + 1 < cols_) out.sites[out.count++] = site + 1;
  if (r + 1 < rows_) out.sites[out.count++] = site + cols_;
  return out;
}

bool Lattice::adjacent(int a, int b) const noexcept {
  const int dr = std::abs(row(a) - row(b));
  const int dc = std::abs(col(a) - col(b));
  return dr + dc == 1;
}

int SiteWindow::site_at(int slot, int self) const noexcept {
  if (slot == 0) return self;
  const int f = static_cast<int>(future.size());
  if (slot <= f) return future[static_cast<std::size_t>(slot - 1)];
  return past[static_cast<std::size_t>(slot - 1 - f)];
}

OcaPlan::OcaPlan(Lattice lattice, int past_size, int future_size, PlanOptions options,
                 std::vector<SiteWindow> windows)
    : lattice_(lattice),
      past_size_(past_size),
      future_size_(future_size),
      options_(options),
      windows_(std::move(windows)) {
  if (static_cast<int>(windows_.size()) != lattice_.size()) {
    throw std::invalid_argument("plan needs one window per site");
  }
}

std::span<const std::pair<int, int>> OcaPlan::conditional_pairs(int site) const {
  const SiteWindow& w = window(site);
  const std::size_t count = options_.prune_past_pairs ? w.past_pair_begin : w.pairs.size();
  return {w.pairs.data(), count};
}

namespace {

// The `count` sites nearest to `site` among those accepted by `eligible`,
// ordered by (squared distance, index) and returned in ascending index order.
template <class Eligible>
std::vector<int> nearest_sites(const Lattice& lattice, int site, int count, int available,
                               Eligible eligible) {
  std::vector<int> chosen;
  if (count <= 0 || available <= 0) return chosen;
  count = std::min(count, available);

  const int r0 = lattice.row(site);
  const int c0 = lattice.col(site);
  const int max_sq = (lattice.rows() - 1) * (lattice.rows() - 1) +
                     (lattice.cols() - 1) * (lattice.cols() - 1);
  std::vector<std::pair<int, int>> candidates;  // (squared distance, site)
  // Every site within distance R lies in the (2R+1)^2 box, so once the box
  // holds `count` eligible sites with d^2 <= R^2 those are the nearest ones.
  for (int radius = std::max(1, static_cast<int>(std::sqrt(count)));; ++radius) {
    candidates.clear();
    const int limit = radius * radius;
    for (int r = std::max(0, r0 - radius); r <= std::min(lattice.rows() - 1, r0 + radius); ++r) {
      for (int c = std::max(0, c0 - radius); c <= std::min(lattice.cols() - 1, c0 + radius); ++c) {
        const int other = r * lattice.cols() + c;
        if (!eligible(other)) continue;
        const int d2 = (r - r0) * (r - r0) + (c - c0) * (c - c0);
        if (d2 <= limit) candidates.emplace_back(d2, other);
      }
    }
    if (static_cast<int>(candidates.size()) >= count || limit >= max_sq) break;
  }
  std::partial_sort(candidates.begin(), candidates.begin() + count, candidates.end());
  chosen.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) chosen.push_back(candidates[static_cast<std::size_t>(j)].second);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

SiteWindow build_window(const Lattice& lattice, int site, int past_size, int future_size) {
  const int n = lattice.size();
  SiteWindow w;
  w.past = nearest_sites(lattice, site, past_size, site, [site](int j) { return j < site; });
  w.future = nearest_sites(lattice, site, future_size, n - 1 - site,
                           [site](int j) { return j > site; });

  const int slots = w.slot_count();
  const int first_past = w.first_past_slot();
  std::vector<std::pair<int, int>> past_pairs;
  for (int a = 0; a < slots; ++a) {
    const int sa = w.site_at(a, site);
    for (int b = a + 1; b < slots; ++b) {
      if (!lattice.adjacent(sa, w.site_at(b, site))) continue;
      if (a >= first_past) {
        past_pairs.emplace_back(a, b);
      } else {
        w.pairs.emplace_back(a, b);
      }
    }
  }
  w.past_pair_begin = w.pairs.size();
  w.pairs.insert(w.pairs.end(), past_pairs.begin(), past_pairs.end());
  return w;
}

}  // namespace

OcaPlan build_oca_plan(const Lattice& lattice, int past_size, int future_size,
                       PlanOptions options, const Executor& executor) {
  if (past_size < 0 || future_size < 0) {
    throw std::domain_error("conditioning set sizes must be nonnegative");
  }
  std::vector<SiteWindow> windows(static_cast<std::size_t>(lattice.size()));
  executor.for_each(windows.size(), [&](std::size_t i) {
    windows[i] = build_window(lattice, static_cast<int>(i), past_size, future_size);
  });
  return OcaPlan(lattice, past_size, future_size, options, std::move(windows));
}

OcaPlan build_full_plan(const Lattice& lattice, PlanOptions options) {
  return build_oca_plan(lattice, lattice.size(), lattice.size(), options);
}

void dump_plan(std::ostream& out, const OcaPlan& plan) {
  auto write_set = [&out](const std::vector<int>& sites) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      if (j > 0) out << ',';
      out << sites[j] + 1;
    }
  };
  for (int i = 0; i < plan.size(); ++i) {
    const SiteWindow& w = plan.window(i);
    out << i + 1 << "; ";
    write_set(w.past);
    out << "; ";
    write_set(w.future);
    out << '\n';
  }
}

}  // namespace oca
