#include "oca/potts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "oca/errors.hpp"
#include "oca/window_sum.hpp"

namespace oca {

LabelField::LabelField(int k, std::vector<int> labels) : k_(k), labels_(std::move(labels)) {
  if (k < 2) throw std::domain_error("a Potts field needs at least two states");
  for (int label : labels_) {
    if (label < 0 || label >= k) {
      throw std::domain_error("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(k) + ")");
    }
  }
}

LabelField LabelField::constant(int k, int n, int label) {
  return LabelField(k, std::vector<int>(static_cast<std::size_t>(n), label));
}

void LabelField::set(int site, int label) {
  if (label < 0 || label >= k_) throw std::domain_error("label outside state range");
  labels_.at(static_cast<std::size_t>(site)) = label;
}

void check_field(const LabelField& field, const Lattice& lattice) {
  if (field.size() != lattice.size()) {
    throw std::domain_error("field has " + std::to_string(field.size()) + " sites, lattice has " +
                            std::to_string(lattice.size()));
  }
}

namespace {

int agreeing_pairs(std::span<const int> labels, const Lattice& lattice) {
  int s = 0;
  const int rows = lattice.rows();
  const int cols = lattice.cols();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      const int here = labels[static_cast<std::size_t>(i)];
      if (c + 1 < cols && labels[static_cast<std::size_t>(i + 1)] == here) ++s;
      if (r + 1 < rows && labels[static_cast<std::size_t>(i + cols)] == here) ++s;
    }
  }
  return s;
}

// Advances `labels[first..]` as a base-k odometer; false once it wraps.
bool advance(std::vector<int>& labels, int first, int k) {
  for (std::size_t j = static_cast<std::size_t>(first); j < labels.size(); ++j) {
    if (++labels[j] < k) return true;
    labels[j] = 0;
  }
  return false;
}

}  // namespace

int summary_stat(const LabelField& field, const Lattice& lattice) {
  check_field(field, lattice);
  return agreeing_pairs(field.labels(), lattice);
}

double log_potential(const LabelField& field, const Lattice& lattice, double beta) {
  return beta * summary_stat(field, lattice);
}

void check_enumerable(const Lattice& lattice, int k, double limit) {
  const double configurations = std::pow(static_cast<double>(k), lattice.size());
  if (configurations > limit) {
    throw CapacityError("exact enumeration of " + std::to_string(k) + "^" +
                        std::to_string(lattice.size()) + " configurations exceeds the limit");
  }
}

ExactPartition::ExactPartition(const Lattice& lattice, int k, double max_configurations) {
  check_enumerable(lattice, k, max_configurations);
  counts_.assign(static_cast<std::size_t>(lattice.pair_count()) + 1, 0.0);
  std::vector<int> labels(static_cast<std::size_t>(lattice.size()), 0);
  do {
    counts_[static_cast<std::size_t>(agreeing_pairs(labels, lattice))] += 1.0;
  } while (advance(labels, 0, k));
}

double ExactPartition::log_normalizer(double beta) const {
  return detail::log_weighted_sum(counts_, beta);
}

double exact_log_density(const LabelField& field, const Lattice& lattice, double beta) {
  check_field(field, lattice);
  const ExactPartition partition(lattice, field.k());
  return log_potential(field, lattice, beta) - partition.log_normalizer(beta);
}

std::vector<double> exact_conditional(const Lattice& lattice, const LabelField& field, int site,
                                      double beta) {
  check_field(field, lattice);
  check_enumerable(lattice, field.k());
  const int k = field.k();
  std::vector<int> labels(field.labels().begin(), field.labels().end());
  std::fill(labels.begin() + site + 1, labels.end(), 0);

  std::vector<double> log_mass(static_cast<std::size_t>(k));
  std::vector<double> counts(static_cast<std::size_t>(lattice.pair_count()) + 1);
  for (int label = 0; label < k; ++label) {
    labels[static_cast<std::size_t>(site)] = label;
    std::fill(counts.begin(), counts.end(), 0.0);
    do {
      counts[static_cast<std::size_t>(agreeing_pairs(labels, lattice))] += 1.0;
    } while (advance(labels, site + 1, k));
    log_mass[static_cast<std::size_t>(label)] = detail::log_weighted_sum(counts, beta);
  }
  double total = -std::numeric_limits<double>::infinity();
  for (double m : log_mass) total = detail::log_add(total, m);
  std::vector<double> p(static_cast<std::size_t>(k));
  for (int label = 0; label < k; ++label) {
    p[static_cast<std::size_t>(label)] = std::exp(log_mass[static_cast<std::size_t>(label)] - total);
  }
  return p;
}

double modified_hamiltonian(const OcaPlan& plan, int site, std::span<const int> labels,
                            double beta) {
  if (static_cast<int>(labels.size()) != plan.size()) {
    throw std::domain_error("label vector does not match the plan's lattice");
  }
  const SiteWindow& w = plan.window(site);
  for (int slot = 0; slot < w.slot_count(); ++slot) {
    if (labels[static_cast<std::size_t>(w.site_at(slot, site))] < 0) {
      throw std::domain_error("missing label for site " + std::to_string(w.site_at(slot, site)) +
                              " in the window of site " + std::to_string(site));
    }
  }
  int agree = 0;
  for (const auto& [a, b] : w.pairs) {
    agree += labels[static_cast<std::size_t>(w.site_at(a, site))] ==
             labels[static_cast<std::size_t>(w.site_at(b, site))];
  }
  return beta * agree;
}

namespace {

void run_observed_window(detail::WindowSum& sum, const OcaPlan& plan, const LabelField& field,
                         int site, std::vector<int>& fixed) {
  const SiteWindow& w = plan.window(site);
  fixed.resize(w.past.size());
  for (std::size_t j = 0; j < w.past.size(); ++j) fixed[j] = field[w.past[j]];
  sum.run(field.k(), w.first_past_slot(), plan.conditional_pairs(site), fixed);
}

}  // namespace

std::vector<double> oca_conditional(const OcaPlan& plan, const LabelField& field, int site,
                                    double beta) {
  check_field(field, plan.lattice());
  detail::WindowSum sum;
  std::vector<int> fixed;
  run_observed_window(sum, plan, field, site, fixed);
  const int k = field.k();
  std::vector<double> log_mass(static_cast<std::size_t>(k));
  double total = -std::numeric_limits<double>::infinity();
  for (int label = 0; label < k; ++label) {
    log_mass[static_cast<std::size_t>(label)] = detail::log_weighted_sum(sum.row(label), beta);
    total = detail::log_add(total, log_mass[static_cast<std::size_t>(label)]);
  }
  std::vector<double> p(static_cast<std::size_t>(k));
  for (int label = 0; label < k; ++label) {
    p[static_cast<std::size_t>(label)] = std::exp(log_mass[static_cast<std::size_t>(label)] - total);
  }
  return p;
}

OcaLikelihood::OcaLikelihood(const OcaPlan& plan, const LabelField& field,
                             const Executor& executor) {
  check_field(field, plan.lattice());
  const int n = field.size();
  offset_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    offset_[static_cast<std::size_t>(i) + 1] =
        offset_[static_cast<std::size_t>(i)] + plan.conditional_pairs(i).size() + 1;
  }
  numerator_.assign(offset_.back(), 0.0);
  denominator_.assign(offset_.back(), 0.0);
  executor.for_blocks(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    detail::WindowSum sum;
    std::vector<int> fixed;
    for (std::size_t i = begin; i < end; ++i) {
      const int site = static_cast<int>(i);
      run_observed_window(sum, plan, field, site, fixed);
      const auto observed = sum.row(field[site]);
      std::copy(observed.begin(), observed.end(), numerator_.begin() + static_cast<std::ptrdiff_t>(offset_[i]));
      for (int label = 0; label < field.k(); ++label) {
        const auto row = sum.row(label);
        for (std::size_t c = 0; c < row.size(); ++c) denominator_[offset_[i] + c] += row[c];
      }
    }
  });
}

std::vector<double> OcaLikelihood::terms(double beta, const Executor& executor) const {
  const std::size_t n = offset_.size() - 1;
  std::vector<double> out(n);
  executor.for_each(n, [&](std::size_t i) {
    const std::size_t width = offset_[i + 1] - offset_[i];
    const std::span<const double> num(numerator_.data() + offset_[i], width);
    const std::span<const double> den(denominator_.data() + offset_[i], width);
    out[i] = detail::log_weighted_sum(num, beta) - detail::log_weighted_sum(den, beta);
  });
  return out;
}

double OcaLikelihood::operator()(double beta, const Executor& executor) const {
  double total = 0.0;
  for (double t : terms(beta, executor)) total += t;
  return total;
}

double oca_log_likelihood(const LabelField& field, double beta, const OcaPlan& plan,
                          const Executor& executor) {
  return OcaLikelihood(plan, field, executor)(beta, executor);
}

double pseudo_log_likelihood(const LabelField& field, const Lattice& lattice, double beta) {
  check_field(field, lattice);
  const int k = field.k();
  std::vector<double> agree(static_cast<std::size_t>(k));
  double total = 0.0;
  for (int i = 0; i < lattice.size(); ++i) {
    std::fill(agree.begin(), agree.end(), 0.0);
    for (int j : lattice.neighbors(i)) agree[static_cast<std::size_t>(field[j])] += 1.0;
    double log_norm = -std::numeric_limits<double>::infinity();
    for (double a : agree) log_norm = detail::log_add(log_norm, beta * a);
    total += beta * agree[static_cast<std::size_t>(field[i])] - log_norm;
  }
  return total;
}

BetaFit maximize_on_interval(const std::function<double(double)>& objective, double lo,
                             double hi, double tol) {
  if (!(hi > lo)) throw std::domain_error("search interval is empty");
  BetaFit fit;
  auto eval = [&](double x) {
    const double v = objective(x);
    ++fit.evaluations;
    if (!std::isfinite(v)) throw NumericalError("objective is not finite", x);
    return v;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    }
  }
  fit.beta = f1 >= f2 ? x1 : x2;
  fit.objective = std::max(f1, f2);

  for (double edge : {lo, hi}) {
    const double fe = eval(edge);
    if (fe > fit.objective) {
      fit.beta = edge;
      fit.objective = fe;
    }
  }
  fit.at_boundary = fit.beta - lo <= tol || hi - fit.beta <= tol;
  return fit;
}

BetaFit fit_beta(const LabelField& field, const OcaPlan& plan, Objective objective,
                 double beta_max, double tol, const Executor& executor) {
  if (objective == Objective::pseudo) {
    return maximize_on_interval(
        [&](double beta) { return pseudo_log_likelihood(field, plan.lattice(), beta); }, 0.0,
        beta_max, tol);
  }
  const OcaLikelihood likelihood(plan, field, executor);
  return maximize_on_interval([&](double beta) { return likelihood(beta, executor); }, 0.0,
                              beta_max, tol);
}

}  // namespace oca
