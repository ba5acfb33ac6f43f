#pragma once

#include <functional>
#include <span>
#include <vector>

#include "oca/lattice.hpp"
#include "oca/parallel.hpp"

namespace oca {

/// A full configuration with labels in [0, k). Row-major site order.
class LabelField {
 public:
  LabelField() = default;
  LabelField(int k, std::vector<int> labels);
  /// All sites set to `label`.
  static LabelField constant(int k, int n, int label = 0);

  int k() const noexcept { return k_; }
  int size() const noexcept { return static_cast<int>(labels_.size()); }
  int operator[](int site) const { return labels_[static_cast<std::size_t>(site)]; }
  void set(int site, int label);
  std::span<const int> labels() const noexcept { return labels_; }

  friend bool operator==(const LabelField&, const LabelField&) = default;

 private:
  int k_ = 2;
  std::vector<int> labels_;
};

/// Throws std::domain_error unless `field` has one label per lattice site.
void check_field(const LabelField& field, const Lattice& lattice);

/// Number of first-order neighbor pairs with equal labels.
int summary_stat(const LabelField& field, const Lattice& lattice);

/// beta * S(z): unnormalized log-density, p(z) ∝ exp(+beta S(z)).
double log_potential(const LabelField& field, const Lattice& lattice, double beta);

// ---------------------------------------------------------------------------
// Exact enumeration oracles. Exponential cost; limited to k^n <= 2^24.

inline constexpr double kMaxEnumeration = 16777216.0;  // 2^24

/// Histogram of S over all k^n configurations, from which the normalizing
/// constant follows for any beta.
class ExactPartition {
 public:
  ExactPartition(const Lattice& lattice, int k, double max_configurations = kMaxEnumeration);

  /// log N_beta.
  double log_normalizer(double beta) const;
  /// stat_counts()[s] = number of configurations with S = s.
  const std::vector<double>& stat_counts() const noexcept { return counts_; }

 private:
  std::vector<double> counts_;
};

/// Throws CapacityError when k^n exceeds `limit`.
void check_enumerable(const Lattice& lattice, int k, double limit = kMaxEnumeration);

double exact_log_density(const LabelField& field, const Lattice& lattice, double beta);

/// Exact ordered conditional p(z_i = . | z_{1:i-1}) by summing over every
/// completion of the later sites; reads only field[0..site).
std::vector<double> exact_conditional(const Lattice& lattice, const LabelField& field, int site,
                                      double beta);

// ---------------------------------------------------------------------------
// Ordered conditional approximation.

/// beta * number of agreeing pairs inside the window of `site`. `labels` has
/// one entry per lattice site; negative entries are missing and must not
/// belong to the window.
double modified_hamiltonian(const OcaPlan& plan, int site, std::span<const int> labels,
                            double beta);

/// Approximate ordered conditional over the k labels of `site`: the window's
/// future sites are summed out, its past sites are read from `field`.
std::vector<double> oca_conditional(const OcaPlan& plan, const LabelField& field, int site,
                                    double beta);

/// Caches each site's agreement-count tables for one field so the OCA
/// log-likelihood can be re-evaluated at many beta values cheaply.
class OcaLikelihood {
 public:
  OcaLikelihood(const OcaPlan& plan, const LabelField& field,
                const Executor& executor = serial_executor());

  /// Sum over sites of log p^(z_i | z_{1:i-1}), reduced in site order.
  double operator()(double beta, const Executor& executor = serial_executor()) const;

  /// Per-site terms at `beta`.
  std::vector<double> terms(double beta, const Executor& executor = serial_executor()) const;

 private:
  std::vector<double> numerator_;    // per site: counts with the observed label
  std::vector<double> denominator_;  // per site: counts summed over labels
  std::vector<std::size_t> offset_;
};

double oca_log_likelihood(const LabelField& field, double beta, const OcaPlan& plan,
                          const Executor& executor = serial_executor());

/// Besag pseudo-log-likelihood: sum of log full conditionals.
double pseudo_log_likelihood(const LabelField& field, const Lattice& lattice, double beta);

// ---------------------------------------------------------------------------
// Estimation.

struct BetaFit {
  double beta = 0.0;
  double objective = 0.0;
  bool at_boundary = false;
  int evaluations = 0;
};

/// Golden-section maximization on [lo, hi] to absolute tolerance `tol`. The
/// endpoints are evaluated too, so a monotone objective lands on the boundary.
/// Throws NumericalError if the objective is non-finite.
BetaFit maximize_on_interval(const std::function<double(double)>& objective, double lo,
                             double hi, double tol = 1e-4);

enum class Objective { oca, pseudo };

BetaFit fit_beta(const LabelField& field, const OcaPlan& plan, Objective objective,
                 double beta_max = 2.0, double tol = 1e-4,
                 const Executor& executor = serial_executor());

}  // namespace oca
