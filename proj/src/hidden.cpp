#include "oca/hidden.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "oca/errors.hpp"
#include "oca/window_sum.hpp"

namespace oca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-site label weights exp(log f - max_k log f), each row's maximum is 1.
void window_weights(const Eigen::MatrixXd& log_f, const SiteWindow& w, int site, int slots,
                    int first_weighted, std::vector<double>& out) {
  const int k = static_cast<int>(log_f.cols());
  out.assign(static_cast<std::size_t>(slots * k), 1.0);
  for (int slot = first_weighted; slot < slots; ++slot) {
    const int s = w.site_at(slot, site);
    const double peak = log_f.row(s).maxCoeff();
    for (int label = 0; label < k; ++label) {
      out[static_cast<std::size_t>(slot * k + label)] = std::exp(log_f(s, label) - peak);
    }
  }
}

}  // namespace

void EmissionModel::validate() const {
  if (mu.size() != sigma.size() || mu.empty()) {
    throw std::domain_error("emission model needs one mean and one sd per class");
  }
  for (double s : sigma) {
    if (!(s > 0.0)) throw std::domain_error("emission sd must be positive");
  }
}

void ObservationField::validate() const {
  if (!sd_override.empty() && sd_override.size() != y.size()) {
    throw std::domain_error("sd override must have one entry per site");
  }
  for (const auto& sd : sd_override) {
    if (sd && !(*sd > 0.0)) throw std::domain_error("sd override must be positive");
  }
}

void Priors::validate() const {
  if (!(sigma0 > 0.0) || !(alpha > 0.0) || !(eta > 0.0)) {
    throw std::domain_error("prior sigma0, alpha and eta must be positive");
  }
}

double emission_logpdf(double y, int label, const EmissionModel& emission,
                       std::optional<double> sd_override) {
  const double sd = sd_override ? *sd_override : emission.sigma[static_cast<std::size_t>(label)];
  const double z = (y - emission.mu[static_cast<std::size_t>(label)]) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

Eigen::MatrixXd log_emission_table(const ObservationField& obs, const EmissionModel& emission) {
  obs.validate();
  emission.validate();
  Eigen::MatrixXd table(obs.size(), emission.k());
  for (int i = 0; i < obs.size(); ++i) {
    const auto sd = obs.override_at(i);
    for (int label = 0; label < emission.k(); ++label) {
      table(i, label) = emission_logpdf(obs.y[static_cast<std::size_t>(i)], label, emission, sd);
    }
  }
  return table;
}

namespace {

void check_observations(const ObservationField& obs, const Lattice& lattice) {
  if (obs.size() != lattice.size()) {
    throw std::domain_error("observation field has " + std::to_string(obs.size()) +
                            " sites, lattice has " + std::to_string(lattice.size()));
  }
}

// Marginal window: every slot free, past slots weighted by their emissions.
void run_marginal_window(detail::WindowSum& sum, std::vector<double>& weights,
                         const OcaPlan& plan, int site, const Eigen::MatrixXd& log_f) {
  const SiteWindow& w = plan.window(site);
  window_weights(log_f, w, site, w.slot_count(), w.first_past_slot(), weights);
  sum.run(static_cast<int>(log_f.cols()), w.slot_count(), w.pairs, {}, weights);
}

double marginal_term(std::span<const double> tables, int k, int columns, double beta,
                     const Eigen::MatrixXd& site_log_weight, int site) {
  double num = kNegInf;
  double den = kNegInf;
  for (int label = 0; label < k; ++label) {
    const double mass = detail::log_weighted_sum(
        tables.subspan(static_cast<std::size_t>(label * columns), static_cast<std::size_t>(columns)),
        beta);
    num = detail::log_add(num, site_log_weight(site, label) + mass);
    den = detail::log_add(den, mass);
  }
  return num - den;
}

}  // namespace

double oca_marginal_log_conditional(const OcaPlan& plan, int site, const ObservationField& obs,
                                    double beta, const EmissionModel& emission) {
  check_observations(obs, plan.lattice());
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  detail::WindowSum sum;
  std::vector<double> weights;
  run_marginal_window(sum, weights, plan, site, log_f);
  const double peak = log_f.row(site).maxCoeff();
  Eigen::MatrixXd site_weight = log_f.array() - peak;
  double num = kNegInf;
  double den = kNegInf;
  for (int label = 0; label < emission.k(); ++label) {
    const double mass = detail::log_weighted_sum(sum.row(label), beta);
    num = detail::log_add(num, site_weight(site, label) + mass);
    den = detail::log_add(den, mass);
  }
  return num - den + peak;
}

OcaMarginalLikelihood::OcaMarginalLikelihood(const OcaPlan& plan, const ObservationField& obs,
                                             const EmissionModel& emission,
                                             const Executor& executor)
    : k_(emission.k()) {
  check_observations(obs, plan.lattice());
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  site_log_scale_ = log_f.rowwise().maxCoeff();
  site_log_weight_ = log_f.colwise() - site_log_scale_;

  const int n = plan.size();
  columns_.resize(static_cast<std::size_t>(n));
  offset_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    columns_[static_cast<std::size_t>(i)] = static_cast<int>(plan.window(i).pairs.size()) + 1;
    offset_[static_cast<std::size_t>(i) + 1] =
        offset_[static_cast<std::size_t>(i)] +
        static_cast<std::size_t>(k_ * columns_[static_cast<std::size_t>(i)]);
  }
  tables_.assign(offset_.back(), 0.0);
  executor.for_blocks(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    detail::WindowSum sum;
    std::vector<double> weights;
    for (std::size_t i = begin; i < end; ++i) {
      run_marginal_window(sum, weights, plan, static_cast<int>(i), log_f);
      for (int label = 0; label < k_; ++label) {
        const auto row = sum.row(label);
        std::copy(row.begin(), row.end(),
                  tables_.begin() + static_cast<std::ptrdiff_t>(
                                        offset_[i] + static_cast<std::size_t>(label) * row.size()));
      }
    }
  });
}

double OcaMarginalLikelihood::operator()(double beta, const Executor& executor) const {
  const std::size_t n = columns_.size();
  std::vector<double> terms(n);
  executor.for_each(n, [&](std::size_t i) {
    const std::span<const double> tables(tables_.data() + offset_[i], offset_[i + 1] - offset_[i]);
    terms[i] = marginal_term(tables, k_, columns_[i], beta, site_log_weight_, static_cast<int>(i)) +
               site_log_scale_(static_cast<Eigen::Index>(i));
  });
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

double oca_marginal_log_likelihood(const ObservationField& obs, double beta,
                                   const EmissionModel& emission, const OcaPlan& plan,
                                   const Executor& executor) {
  return OcaMarginalLikelihood(plan, obs, emission, executor)(beta, executor);
}

namespace {

// Calls visit(labels) for each of the k^n fields.
template <class Visit>
void for_each_field(int n, int k, Visit visit) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (;;) {
    visit(labels);
    std::size_t j = 0;
    for (; j < labels.size(); ++j) {
      if (++labels[j] < k) break;
      labels[j] = 0;
    }
    if (j == labels.size()) return;
  }
}

double joint_log_weight(std::span<const int> labels, const Lattice& lattice, double beta,
                        const Eigen::MatrixXd& log_f) {
  double value = 0.0;
  int agree = 0;
  for (int i = 0; i < lattice.size(); ++i) {
    const int here = labels[static_cast<std::size_t>(i)];
    value += log_f(i, here);
    for (int j : lattice.neighbors(i)) {
      if (j > i && labels[static_cast<std::size_t>(j)] == here) ++agree;
    }
  }
  return value + beta * agree;
}

}  // namespace

double exact_marginal_log_likelihood(const ObservationField& obs, double beta,
                                     const EmissionModel& emission, const Lattice& lattice) {
  check_observations(obs, lattice);
  check_enumerable(lattice, emission.k(), 1048576.0);
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  double total = kNegInf;
  for_each_field(lattice.size(), emission.k(), [&](const std::vector<int>& labels) {
    total = detail::log_add(total, joint_log_weight(labels, lattice, beta, log_f));
  });
  return total - ExactPartition(lattice, emission.k()).log_normalizer(beta);
}

double exact_log_posterior(const LabelField& field, const ObservationField& obs, double beta,
                           const EmissionModel& emission, const Lattice& lattice) {
  check_field(field, lattice);
  check_observations(obs, lattice);
  check_enumerable(lattice, emission.k(), 1048576.0);
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  double total = kNegInf;
  for_each_field(lattice.size(), emission.k(), [&](const std::vector<int>& labels) {
    total = detail::log_add(total, joint_log_weight(labels, lattice, beta, log_f));
  });
  return joint_log_weight(field.labels(), lattice, beta, log_f) - total;
}

namespace {

// Unnormalized log masses of the site's labels under the latent conditional.
void latent_log_mass(detail::WindowSum& sum, std::vector<int>& fixed, std::vector<double>& weights,
                     const OcaPlan& plan, int site, const LabelField& field,
                     const Eigen::MatrixXd& log_f, double beta, std::vector<double>& out) {
  const SiteWindow& w = plan.window(site);
  const int free_count = w.first_past_slot();
  fixed.resize(w.past.size());
  for (std::size_t j = 0; j < w.past.size(); ++j) fixed[j] = field[w.past[j]];
  window_weights(log_f, w, site, free_count, 0, weights);
  const int k = static_cast<int>(log_f.cols());
  sum.run(k, free_count, plan.conditional_pairs(site), fixed, weights);
  out.resize(static_cast<std::size_t>(k));
  for (int label = 0; label < k; ++label) {
    out[static_cast<std::size_t>(label)] = detail::log_weighted_sum(sum.row(label), beta);
  }
}

void normalize_log_mass(std::vector<double>& mass) {
  double total = kNegInf;
  for (double m : mass) total = detail::log_add(total, m);
  for (double& m : mass) m = std::exp(m - total);
}

}  // namespace

std::vector<double> latent_conditional(const OcaPlan& plan, int site, const LabelField& field,
                                       const ObservationField& obs, double beta,
                                       const EmissionModel& emission) {
  check_field(field, plan.lattice());
  check_observations(obs, plan.lattice());
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  detail::WindowSum sum;
  std::vector<int> fixed;
  std::vector<double> weights;
  std::vector<double> p;
  latent_log_mass(sum, fixed, weights, plan, site, field, log_f, beta, p);
  normalize_log_mass(p);
  return p;
}

LabelField sample_hidden_field(const ObservationField& obs, double beta,
                               const EmissionModel& emission, const OcaPlan& plan, Rng& rng) {
  check_observations(obs, plan.lattice());
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  LabelField field = LabelField::constant(emission.k(), obs.size());
  detail::WindowSum sum;
  std::vector<int> fixed;
  std::vector<double> weights;
  std::vector<double> p;
  for (int i = 0; i < obs.size(); ++i) {
    latent_log_mass(sum, fixed, weights, plan, i, field, log_f, beta, p);
    const double peak = *std::max_element(p.begin(), p.end());
    for (double& m : p) m = std::exp(m - peak);
    field.set(i, draw_categorical(p, rng));
  }
  return field;
}

double oca_log_posterior(const LabelField& field, const ObservationField& obs, double beta,
                         const EmissionModel& emission, const OcaPlan& plan) {
  check_field(field, plan.lattice());
  check_observations(obs, plan.lattice());
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  detail::WindowSum sum;
  std::vector<int> fixed;
  std::vector<double> weights;
  std::vector<double> mass;
  double total = 0.0;
  for (int i = 0; i < field.size(); ++i) {
    latent_log_mass(sum, fixed, weights, plan, i, field, log_f, beta, mass);
    double norm = kNegInf;
    for (double m : mass) norm = detail::log_add(norm, m);
    total += mass[static_cast<std::size_t>(field[i])] - norm;
  }
  return total;
}

std::vector<ClassStats> class_stats(const LabelField& field, const ObservationField& obs) {
  std::vector<ClassStats> stats(static_cast<std::size_t>(field.k()));
  for (int i = 0; i < field.size(); ++i) {
    if (obs.override_at(i)) continue;
    ClassStats& s = stats[static_cast<std::size_t>(field[i])];
    ++s.count;
    s.mean += obs.y[static_cast<std::size_t>(i)];
  }
  for (ClassStats& s : stats) {
    if (s.count > 0) s.mean /= s.count;
  }
  for (int i = 0; i < field.size(); ++i) {
    if (obs.override_at(i)) continue;
    ClassStats& s = stats[static_cast<std::size_t>(field[i])];
    const double d = obs.y[static_cast<std::size_t>(i)] - s.mean;
    s.sum_sq += d * d;
  }
  return stats;
}

VariancePosterior variance_posterior(const ClassStats& stats, const Priors& priors) {
  if (stats.count == 0) return {priors.alpha, priors.eta};
  return {priors.alpha + 0.5 * (stats.count - 1), priors.eta + 0.5 * stats.sum_sq};
}

MeanPosterior mean_posterior(const ClassStats& stats, double sigma2, double prior_mean,
                             double sigma0) {
  const double prior_precision = 1.0 / (sigma0 * sigma0);
  const double data_precision = stats.count / sigma2;
  const double variance = 1.0 / (data_precision + prior_precision);
  return {variance * (stats.count * stats.mean / sigma2 + prior_mean * prior_precision), variance};
}

EmissionModel update_emission_params(const LabelField& field, const ObservationField& obs,
                                     const Priors& priors, Rng& rng) {
  priors.validate();
  if (static_cast<int>(priors.c.size()) != field.k()) {
    throw std::domain_error("need one prior mean per class");
  }
  EmissionModel out;
  const auto stats = class_stats(field, obs);
  for (int j = 0; j < field.k(); ++j) {
    const ClassStats& s = stats[static_cast<std::size_t>(j)];
    const VariancePosterior vp = variance_posterior(s, priors);
    const double sigma2 = inverse_gamma_draw(rng, vp.shape, vp.scale);
    const MeanPosterior mp = mean_posterior(s, sigma2, priors.c[static_cast<std::size_t>(j)],
                                            priors.sigma0);
    out.mu.push_back(mp.mean + std::sqrt(mp.variance) * standard_normal(rng));
    out.sigma.push_back(std::sqrt(sigma2));
  }
  return out;
}

BetaUpdate update_beta(const OcaLikelihood& likelihood, double beta, double proposal_sd, Rng& rng,
                       const Executor& executor) {
  if (!(beta >= 0.0)) throw std::domain_error("beta must be non-negative");
  if (!(proposal_sd >= 0.0)) throw std::domain_error("proposal sd must be non-negative");
  const double proposal = beta + proposal_sd * standard_normal(rng);
  const double u = uniform01(rng);
  if (proposal < 0.0) return {beta, false};
  if (proposal == beta) return {beta, true};
  const double log_ratio = likelihood(proposal, executor) - likelihood(beta, executor);
  if (std::isnan(log_ratio)) throw NumericalError("beta acceptance ratio is not finite", proposal);
  if (std::log(u) < log_ratio) return {proposal, true};
  return {beta, false};
}

BetaUpdate update_beta(const LabelField& field, double beta, double proposal_sd,
                       const OcaPlan& plan, Rng& rng, const Executor& executor) {
  return update_beta(OcaLikelihood(plan, field, executor), beta, proposal_sd, rng, executor);
}

void finish_summaries(SegmentationResult& result) {
  const auto n = result.tallies.rows();
  result.probabilities = result.tallies.cast<double>();
  if (result.retained > 0) result.probabilities /= static_cast<double>(result.retained);
  result.hpp.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    result.tallies.row(i).maxCoeff(&best);
    result.hpp[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
}

namespace {

TraceRow trace_row(const GibbsState& state) {
  return {state.iteration, state.beta, state.emission.mu, state.emission.sigma, state.pi};
}

}  // namespace

SegmentationResult run_gibbs(const ObservationField& obs, const Priors& priors,
                             const OcaPlan& plan, const GibbsOptions& options, GibbsState init,
                             Rng& rng, const Executor& executor) {
  check_observations(obs, plan.lattice());
  priors.validate();
  init.emission.validate();
  if (options.iterations < 1 || options.burn_in < 0 || options.burn_in >= options.iterations) {
    throw std::domain_error("need 0 <= burn_in < iterations");
  }
  const int k = init.emission.k();
  SegmentationResult result;
  result.tallies = Eigen::MatrixXi::Zero(obs.size(), k);
  result.state = std::move(init);
  GibbsState& state = result.state;
  int accepted = 0;
  for (int iter = 1; iter <= options.iterations; ++iter) {
    state.iteration = iter;
    state.z = sample_hidden_field(obs, state.beta, state.emission, plan, rng);
    state.emission = update_emission_params(state.z, obs, priors, rng);
    const BetaUpdate step = update_beta(OcaLikelihood(plan, state.z, executor), state.beta,
                                        options.proposal_sd, rng, executor);
    state.beta = step.beta;
    accepted += step.accepted;
    result.trace.push_back(trace_row(state));
    if (iter > options.burn_in) {
      for (int i = 0; i < obs.size(); ++i) ++result.tallies(i, state.z[i]);
      ++result.retained;
      if (options.on_retained) options.on_retained(state, rng);
    }
  }
  result.acceptance_rate = static_cast<double>(accepted) / options.iterations;
  finish_summaries(result);
  return result;
}

ObservationField hold_out(const ObservationField& obs, const std::vector<int>& sites, double sd) {
  ObservationField out = obs;
  if (out.sd_override.empty()) out.sd_override.assign(obs.y.size(), std::nullopt);
  for (int s : sites) out.sd_override.at(static_cast<std::size_t>(s)) = sd;
  return out;
}

PredictiveCollector::PredictiveCollector(std::vector<int> sites, int draws_per_site)
    : sites_(std::move(sites)), draws_(draws_per_site), samples_(sites_.size()) {}

void PredictiveCollector::collect(const GibbsState& state, Rng& rng) {
  for (std::size_t s = 0; s < sites_.size(); ++s) {
    const int label = state.z[sites_[s]];
    const double mu = state.emission.mu[static_cast<std::size_t>(label)];
    const double sigma = state.emission.sigma[static_cast<std::size_t>(label)];
    for (int d = 0; d < draws_; ++d) samples_[s].push_back(mu + sigma * standard_normal(rng));
  }
}

RetainedHook PredictiveCollector::hook() {
  return [this](const GibbsState& state, Rng& rng) { collect(state, rng); };
}

HeldOutPrediction heldout_predict(const ObservationField& obs, const std::vector<int>& sites,
                                  const Priors& priors, const OcaPlan& plan,
                                  GibbsOptions options, GibbsState init, int draws_per_site,
                                  Rng& rng, const Executor& executor) {
  PredictiveCollector collector(sites, draws_per_site);
  if (!sites.empty()) options.on_retained = collector.hook();
  HeldOutPrediction out;
  out.result = run_gibbs(obs, priors, plan, options, std::move(init), rng, executor);
  out.sites = collector.sites();
  out.samples = collector.samples();
  return out;
}

}  // namespace oca
