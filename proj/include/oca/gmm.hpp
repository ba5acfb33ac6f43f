#pragma once

#include <span>
#include <vector>

#include "oca/hidden.hpp"
#include "oca/potts.hpp"
#include "oca/random.hpp"

namespace oca {

struct KMeansResult {
  std::vector<int> labels;
  std::vector<double> means;
  std::vector<double> sds;         // sample sd per cluster (0 for singletons)
  std::vector<double> objective;   // within-cluster sum of squares after each iteration
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm on scalar data, started from k evenly spaced sample
/// quantiles. Empty clusters are reseeded at the point farthest from its
/// centroid. Deterministic. Throws std::domain_error when k > y.size().
KMeansResult kmeans(std::span<const double> y, int k, int max_iterations = 100);

struct GibbsInit {
  GibbsState state;
  KMeansResult kmeans;
};

/// Gibbs starting point: emission from k-means on the sites without an sd
/// override, labels by per-site maximum likelihood, beta by a coarse grid
/// search of the OCA likelihood of those labels.
GibbsInit initialize(const ObservationField& obs, int k, const OcaPlan& plan,
                     double beta_max = 2.0, double beta_step = 0.05,
                     const Executor& executor = serial_executor());

inline GibbsState initialize_gibbs(const ObservationField& obs, int k, const OcaPlan& plan,
                                   double beta_max = 2.0, double beta_step = 0.05,
                                   const Executor& executor = serial_executor()) {
  return initialize(obs, k, plan, beta_max, beta_step, executor).state;
}

/// Per-site maximum-likelihood labels.
LabelField max_likelihood_labels(const ObservationField& obs, const EmissionModel& emission);

/// Dirichlet parameters after observing `field`: alpha_k + n_k.
std::vector<double> dirichlet_posterior(std::span<const double> alpha, const LabelField& field);
std::vector<double> dirichlet_draw(std::span<const double> alpha, Rng& rng);

struct GmmOptions {
  int iterations = 1000;
  int burn_in = 500;
  std::vector<double> dirichlet;  // empty: 1/k for every class
  RetainedHook on_retained;
};

/// Gibbs sampler for the finite Gaussian mixture with a Dirichlet prior on
/// the class weights; labels are conditionally independent given the
/// parameters. `init.z` and `init.emission` seed the chain.
SegmentationResult gmm_gibbs(const ObservationField& obs, const Priors& priors,
                             const GmmOptions& options, GibbsState init, Rng& rng);

/// Relabels classes in increasing order of their final means.
void relabel_by_means(SegmentationResult& result);

}  // namespace oca
