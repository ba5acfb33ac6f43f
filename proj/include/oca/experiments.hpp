#pragma once

#include <cstdint>
#include <vector>

#include "oca/gmm.hpp"
#include "oca/hidden.hpp"
#include "oca/potts.hpp"
#include "oca/sampler.hpp"

namespace oca {

// ---------------------------------------------------------------------------
// Repeated beta estimation on Swendsen-Wang fields.

struct EstimationStudy {
  Lattice lattice{12, 12};
  int k = 2;
  double beta = 0.35;
  int replicates = 60;
  std::vector<int> future_sizes{4, 6};  // past set size is twice this
  int sweeps = 1000;
  double beta_max = 2.0;
  std::uint64_t seed = 1;
};

struct EstimationRow {
  int replicate = 0;
  Objective objective = Objective::oca;
  int future_size = 0;  // 0 for pseudo-likelihood
  double estimate = 0.0;
  bool at_boundary = false;
};

struct EstimationSummary {
  Objective objective = Objective::oca;
  int future_size = 0;
  double mean = 0.0;
  double rmse = 0.0;
};

/// Replicate r simulates from RNG stream r. Rows come in replicate order, the
/// pseudo-likelihood estimate first.
std::vector<EstimationRow> run_estimation_study(const EstimationStudy& study,
                                                const Executor& executor = serial_executor());

/// One summary per (objective, future size), pseudo-likelihood first.
std::vector<EstimationSummary> summarize_estimates(const std::vector<EstimationRow>& rows,
                                                   double truth);

// ---------------------------------------------------------------------------
// Segmentation pipeline shared by the CLI and the experiments.

enum class SegmentModel { oca, gmm };

struct SegmentConfig {
  int k = 3;
  SegmentModel model = SegmentModel::oca;
  int iterations = 1000;
  int burn_in = 500;
  double proposal_sd = 0.05;
  Priors priors;                  // empty c: class means from k-means
  std::vector<double> dirichlet;  // GMM only; empty means 1/k
  double beta_max = 2.0;
};

struct Segmentation {
  SegmentationResult result;
  GibbsInit init;
};

/// k-means start, beta by grid search, then the chosen sampler. Classes are
/// relabeled by increasing mean afterwards.
Segmentation segment(const ObservationField& obs, const OcaPlan& plan, const SegmentConfig& config,
                     Rng& rng, const Executor& executor = serial_executor(),
                     const RetainedHook& hook = {});

/// Latent field by Swendsen-Wang from a uniform start, plus Gaussian noise.
struct HiddenSample {
  LabelField z;
  ObservationField obs;
};

HiddenSample simulate_hidden(const Lattice& lattice, double beta, const EmissionModel& emission,
                             int sweeps, Rng& rng);

// ---------------------------------------------------------------------------
// Held-out prediction with CRPS scoring.

struct HeldOutStudy {
  double fraction = 0.1;
  int repetitions = 10;
  int draws_per_site = 10;
  std::uint64_t seed = 1;
};

struct HeldOutRun {
  int repetition = 0;
  std::vector<int> sites;
  double oca_crps = 0.0;  // mean over held-out sites; NaN when none
  double gmm_crps = 0.0;
  std::vector<std::vector<double>> oca_samples;
  std::vector<std::vector<double>> gmm_samples;
};

/// Repetition r draws its held-out sites and both chains from RNG stream r.
/// `config.model` is ignored; both models run.
std::vector<HeldOutRun> run_heldout_study(const ObservationField& obs, const OcaPlan& plan,
                                          const SegmentConfig& config, const HeldOutStudy& study,
                                          const Executor& executor = serial_executor());

/// round(fraction * n) distinct sites in increasing order.
std::vector<int> choose_heldout(int n, double fraction, Rng& rng);

}  // namespace oca
