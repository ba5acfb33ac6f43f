#include "oca/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "oca/metrics.hpp"

namespace oca {

std::vector<EstimationRow> run_estimation_study(const EstimationStudy& study,
                                                const Executor& executor) {
  if (study.replicates < 1) throw std::domain_error("need at least one replicate");
  std::vector<OcaPlan> plans;
  for (int mf : study.future_sizes) plans.push_back(build_oca_plan(study.lattice, 2 * mf, mf));
  const OcaPlan neighbors_only = build_oca_plan(study.lattice, 0, 0);

  const std::size_t per = study.future_sizes.size() + 1;
  std::vector<EstimationRow> rows(static_cast<std::size_t>(study.replicates) * per);
  executor.for_each(static_cast<std::size_t>(study.replicates), [&](std::size_t r) {
    Rng rng = make_rng(study.seed, r);
    const LabelField z = swendsen_wang_sample(study.lattice, study.beta, study.k, study.sweeps, rng);
    const int rep = static_cast<int>(r);
    const BetaFit pl = fit_beta(z, neighbors_only, Objective::pseudo, study.beta_max);
    rows[r * per] = {rep, Objective::pseudo, 0, pl.beta, pl.at_boundary};
    for (std::size_t m = 0; m < plans.size(); ++m) {
      const BetaFit fit = fit_beta(z, plans[m], Objective::oca, study.beta_max);
      rows[r * per + m + 1] = {rep, Objective::oca, study.future_sizes[m], fit.beta, fit.at_boundary};
    }
  });
  return rows;
}

std::vector<EstimationSummary> summarize_estimates(const std::vector<EstimationRow>& rows,
                                                   double truth) {
  std::vector<EstimationSummary> out;
  std::vector<std::vector<double>> groups;
  for (const EstimationRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const EstimationSummary& s) {
      return s.objective == row.objective && s.future_size == row.future_size;
    });
    if (it == out.end()) {
      out.push_back({row.objective, row.future_size, 0.0, 0.0});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(row.estimate);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    out[g].mean = std::accumulate(groups[g].begin(), groups[g].end(), 0.0) /
                  static_cast<double>(groups[g].size());
    out[g].rmse = rmse(groups[g], truth);
  }
  return out;
}

Segmentation segment(const ObservationField& obs, const OcaPlan& plan, const SegmentConfig& config,
                     Rng& rng, const Executor& executor, const RetainedHook& hook) {
  Segmentation out{{}, initialize(obs, config.k, plan, config.beta_max, 0.05, executor)};
  Priors priors = config.priors;
  if (priors.c.empty()) priors.c = out.init.state.emission.mu;
  if (static_cast<int>(priors.c.size()) != config.k) {
    throw std::domain_error("need one prior mean per class");
  }
  if (config.model == SegmentModel::oca) {
    GibbsOptions options;
    options.iterations = config.iterations;
    options.burn_in = config.burn_in;
    options.proposal_sd = config.proposal_sd;
    options.on_retained = hook;
    out.result = run_gibbs(obs, priors, plan, options, out.init.state, rng, executor);
  } else {
    GmmOptions options;
    options.iterations = config.iterations;
    options.burn_in = config.burn_in;
    options.dirichlet = config.dirichlet;
    options.on_retained = hook;
    out.result = gmm_gibbs(obs, priors, options, out.init.state, rng);
  }
  relabel_by_means(out.result);
  return out;
}

HiddenSample simulate_hidden(const Lattice& lattice, double beta, const EmissionModel& emission,
                             int sweeps, Rng& rng) {
  emission.validate();
  HiddenSample out;
  out.z = swendsen_wang_sample(lattice, beta, emission.k(), sweeps, rng);
  out.obs.y.reserve(static_cast<std::size_t>(lattice.size()));
  for (int label : out.z.labels()) {
    const auto j = static_cast<std::size_t>(label);
    out.obs.y.push_back(emission.mu[j] + emission.sigma[j] * standard_normal(rng));
  }
  return out;
}

std::vector<int> choose_heldout(int n, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::domain_error("fraction must lie in (0, 1)");
  const int count = static_cast<int>(std::lround(fraction * n));
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates on our own uniform draws keeps the choice portable.
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(uniform01(rng) * (n - i));
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(std::min(j, n - 1))]);
  }
  std::vector<int> sites(all.begin(), all.begin() + count);
  std::sort(sites.begin(), sites.end());
  return sites;
}

namespace {

double mean_crps(const std::vector<std::vector<double>>& samples, const std::vector<int>& sites,
                 const ObservationField& obs) {
  if (sites.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (std::size_t s = 0; s < sites.size(); ++s) {
    total += crps_empirical(samples[s], obs.y[static_cast<std::size_t>(sites[s])]);
  }
  return total / static_cast<double>(sites.size());
}

}  // namespace

std::vector<HeldOutRun> run_heldout_study(const ObservationField& obs, const OcaPlan& plan,
                                          const SegmentConfig& config, const HeldOutStudy& study,
                                          const Executor& executor) {
  obs.validate();
  if (study.repetitions < 1 || study.draws_per_site < 1) {
    throw std::domain_error("need positive repetitions and draws per site");
  }
  std::vector<HeldOutRun> runs(static_cast<std::size_t>(study.repetitions));
  executor.for_each(runs.size(), [&](std::size_t r) {
    Rng rng = make_rng(study.seed, r);
    HeldOutRun& run = runs[r];
    run.repetition = static_cast<int>(r);
    run.sites = choose_heldout(obs.size(), study.fraction, rng);
    if (run.sites.empty()) {
      run.oca_crps = run.gmm_crps = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const ObservationField masked = hold_out(obs, run.sites);
    for (SegmentModel model : {SegmentModel::oca, SegmentModel::gmm}) {
      SegmentConfig cfg = config;
      cfg.model = model;
      PredictiveCollector collector(run.sites, study.draws_per_site);
      segment(masked, plan, cfg, rng, serial_executor(), collector.hook());
      auto& samples = model == SegmentModel::oca ? run.oca_samples : run.gmm_samples;
      samples = collector.samples();
      (model == SegmentModel::oca ? run.oca_crps : run.gmm_crps) = mean_crps(samples, run.sites, obs);
    }
  });
  return runs;
}

}  // namespace oca
