#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "oca/lattice.hpp"
#include "oca/parallel.hpp"
#include "oca/potts.hpp"
#include "oca/random.hpp"

namespace oca {

/// Gaussian emission layer: y_i | z_i = k ~ N(mu[k], sigma[k]^2).
struct EmissionModel {
  std::vector<double> mu;
  std::vector<double> sigma;

  int k() const noexcept { return static_cast<int>(mu.size()); }
  void validate() const;
};

/// Observed values, with an optional known standard deviation per site that
/// replaces the class sigma in every emission density at that site.
struct ObservationField {
  std::vector<double> y;
  std::vector<std::optional<double>> sd_override;  // empty or one entry per site

  int size() const noexcept { return static_cast<int>(y.size()); }
  std::optional<double> override_at(int site) const {
    return sd_override.empty() ? std::nullopt : sd_override[static_cast<std::size_t>(site)];
  }
  void validate() const;
};

/// Priors: mu_j ~ N(c_j, sigma0^2), sigma_j^2 ~ IG(alpha, eta), beta flat on [0, inf).
struct Priors {
  std::vector<double> c;
  double sigma0 = 0.1;
  double alpha = 1.5;
  double eta = 0.135;

  void validate() const;
};

double emission_logpdf(double y, int label, const EmissionModel& emission,
                       std::optional<double> sd_override = std::nullopt);

/// n x k table of log f(y_i | k), overrides applied.
Eigen::MatrixXd log_emission_table(const ObservationField& obs, const EmissionModel& emission);

// ---------------------------------------------------------------------------
// Integrated likelihood p(y | beta).

/// Approximate p(y_i | y_{1:i-1}, beta): all labels of the window are summed
/// out, weighted by the emission densities of the site and its past set.
double oca_marginal_log_conditional(const OcaPlan& plan, int site, const ObservationField& obs,
                                    double beta, const EmissionModel& emission);

inline double oca_marginal_conditional(const OcaPlan& plan, int site, const ObservationField& obs,
                                       double beta, const EmissionModel& emission) {
  return std::exp(oca_marginal_log_conditional(plan, site, obs, beta, emission));
}

/// Caches per-site tables so the marginal can be evaluated at many beta.
class OcaMarginalLikelihood {
 public:
  OcaMarginalLikelihood(const OcaPlan& plan, const ObservationField& obs,
                        const EmissionModel& emission,
                        const Executor& executor = serial_executor());

  double operator()(double beta, const Executor& executor = serial_executor()) const;

 private:
  int k_;
  std::vector<double> tables_;  // per site: k rows of counts
  std::vector<std::size_t> offset_;
  std::vector<int> columns_;
  Eigen::MatrixXd site_log_weight_;  // log f(y_i|k) - max_k
  Eigen::VectorXd site_log_scale_;   // max_k log f(y_i|k)
};

double oca_marginal_log_likelihood(const ObservationField& obs, double beta,
                                   const EmissionModel& emission, const OcaPlan& plan,
                                   const Executor& executor = serial_executor());

/// log p(y | beta) by enumerating all k^n latent fields (k^n <= 2^20).
double exact_marginal_log_likelihood(const ObservationField& obs, double beta,
                                     const EmissionModel& emission, const Lattice& lattice);

// ---------------------------------------------------------------------------
// Latent field posterior.

/// Approximate p(z_i = . | z_{1:i-1}, y_i, y_f(i), beta). Reads the labels of
/// the window's past set from `field`.
std::vector<double> latent_conditional(const OcaPlan& plan, int site, const LabelField& field,
                                       const ObservationField& obs, double beta,
                                       const EmissionModel& emission);

/// Ancestral joint draw from the approximate posterior.
LabelField sample_hidden_field(const ObservationField& obs, double beta,
                               const EmissionModel& emission, const OcaPlan& plan, Rng& rng);

/// log of the product of latent conditionals evaluated at `field`.
double oca_log_posterior(const LabelField& field, const ObservationField& obs, double beta,
                         const EmissionModel& emission, const OcaPlan& plan);

/// log p(z | y, beta) by enumeration (k^n <= 2^20).
double exact_log_posterior(const LabelField& field, const ObservationField& obs, double beta,
                           const EmissionModel& emission, const Lattice& lattice);

// ---------------------------------------------------------------------------
// Gibbs sampler.

/// Sufficient statistics of one class; sites with an sd override are skipped.
struct ClassStats {
  int count = 0;
  double mean = 0.0;
  double sum_sq = 0.0;  // sum of squared deviations from the class mean
};

std::vector<ClassStats> class_stats(const LabelField& field, const ObservationField& obs);

struct VariancePosterior {
  double shape = 0.0;  // alpha + (n_j - 1)/2, or alpha when n_j = 0
  double scale = 0.0;  // eta + sum_sq/2
};

struct MeanPosterior {
  double mean = 0.0;      // c_hat
  double variance = 0.0;  // sigma_hat^2
};

VariancePosterior variance_posterior(const ClassStats& stats, const Priors& priors);
MeanPosterior mean_posterior(const ClassStats& stats, double sigma2, double prior_mean,
                             double sigma0);

/// Normal-inverse-gamma draw of every class's (sigma_j, mu_j); empty classes
/// draw from the prior.
EmissionModel update_emission_params(const LabelField& field, const ObservationField& obs,
                                     const Priors& priors, Rng& rng);

struct BetaUpdate {
  double beta = 0.0;
  bool accepted = false;
};

/// Random-walk Metropolis step on beta using the OCA likelihood of `field`.
BetaUpdate update_beta(const OcaLikelihood& likelihood, double beta, double proposal_sd, Rng& rng,
                       const Executor& executor = serial_executor());
BetaUpdate update_beta(const LabelField& field, double beta, double proposal_sd,
                       const OcaPlan& plan, Rng& rng,
                       const Executor& executor = serial_executor());

struct GibbsState {
  LabelField z;
  double beta = 0.0;
  EmissionModel emission;
  std::vector<double> pi;  // mixture weights, GMM only
  int iteration = 0;
};

struct TraceRow {
  int iteration = 0;
  double beta = 0.0;
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> pi;
};

/// Called once per retained iteration, after the label and parameter draws.
using RetainedHook = std::function<void(const GibbsState&, Rng&)>;

struct GibbsOptions {
  int iterations = 1000;
  int burn_in = 500;
  double proposal_sd = 0.05;
  RetainedHook on_retained;
};

struct SegmentationResult {
  GibbsState state;
  Eigen::MatrixXi tallies;        // n x k retained label counts
  Eigen::MatrixXd probabilities;  // tallies / retained
  std::vector<int> hpp;           // per-site most frequent label
  std::vector<TraceRow> trace;
  int retained = 0;
  double acceptance_rate = 0.0;
};

/// Cycles latent draw, emission update and beta update; iterations after
/// `burn_in` are tallied.
SegmentationResult run_gibbs(const ObservationField& obs, const Priors& priors,
                             const OcaPlan& plan, const GibbsOptions& options, GibbsState init,
                             Rng& rng, const Executor& executor = serial_executor());

/// Finalizes tallies into probabilities and the HPP map.
void finish_summaries(SegmentationResult& result);

// ---------------------------------------------------------------------------
// Held-out prediction.

inline constexpr double kHeldOutSd = 100.0;

/// Copy of `obs` with the given sites overridden to sd 100.
ObservationField hold_out(const ObservationField& obs, const std::vector<int>& sites,
                          double sd = kHeldOutSd);

/// Pools normal draws from (mu, sigma) of each held-out site's current label.
class PredictiveCollector {
 public:
  PredictiveCollector(std::vector<int> sites, int draws_per_site);

  void collect(const GibbsState& state, Rng& rng);
  RetainedHook hook();

  const std::vector<int>& sites() const noexcept { return sites_; }
  /// Pooled samples, one vector per held-out site.
  const std::vector<std::vector<double>>& samples() const noexcept { return samples_; }

 private:
  std::vector<int> sites_;
  int draws_;
  std::vector<std::vector<double>> samples_;
};

struct HeldOutPrediction {
  SegmentationResult result;
  std::vector<int> sites;
  std::vector<std::vector<double>> samples;
};

/// Runs the OCA Gibbs sampler on `obs` (held-out sites already overridden)
/// and pools predictive draws for `sites`.
HeldOutPrediction heldout_predict(const ObservationField& obs, const std::vector<int>& sites,
                                  const Priors& priors, const OcaPlan& plan,
                                  GibbsOptions options, GibbsState init, int draws_per_site,
                                  Rng& rng, const Executor& executor = serial_executor());

}  // namespace oca
