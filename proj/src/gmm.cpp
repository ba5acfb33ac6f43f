#include "oca/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oca {

namespace {

double within_ss(std::span<const double> y, const std::vector<int>& labels,
                 const std::vector<double>& centers) {
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - centers[static_cast<std::size_t>(labels[i])];
    ss += d * d;
  }
  return ss;
}

}  // namespace

KMeansResult kmeans(std::span<const double> y, int k, int max_iterations) {
  const auto n = y.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::domain_error("k-means needs 1 <= k <= number of observations");
  }
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  KMeansResult out;
  out.means.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const double q = (j + 0.5) / k;
    out.means[static_cast<std::size_t>(j)] =
        sorted[std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)))];
  }
  out.labels.assign(n, 0);

  auto assign = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::abs(y[i] - out.means[0]);
      for (int j = 1; j < k; ++j) {
        const double d = std::abs(y[i] - out.means[static_cast<std::size_t>(j)]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      changed |= out.labels[i] != best;
      out.labels[i] = best;
    }
    return changed;
  };

  assign();
  for (int iter = 1; iter <= max_iterations; ++iter) {
    out.iterations = iter;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(out.labels[i])] += y[i];
      ++count[static_cast<std::size_t>(out.labels[i])];
    }
    for (int j = 0; j < k; ++j) {
      if (count[static_cast<std::size_t>(j)] > 0) {
        out.means[static_cast<std::size_t>(j)] =
            sum[static_cast<std::size_t>(j)] / count[static_cast<std::size_t>(j)];
      }
    }
    for (int j = 0; j < k; ++j) {
      if (count[static_cast<std::size_t>(j)] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(y[i] - out.means[static_cast<std::size_t>(out.labels[i])]);
        if (d > far_d && count[static_cast<std::size_t>(out.labels[i])] > 1) {
          far_d = d;
          far = i;
        }
      }
      --count[static_cast<std::size_t>(out.labels[far])];
      out.labels[far] = j;
      count[static_cast<std::size_t>(j)] = 1;
      out.means[static_cast<std::size_t>(j)] = y[far];
    }
    out.objective.push_back(within_ss(y, out.labels, out.means));
    if (!assign()) {
      out.converged = true;
      break;
    }
  }

  out.sds.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<int> count(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<std::size_t>(out.labels[i]);
    const double d = y[i] - out.means[j];
    out.sds[j] += d * d;
    ++count[j];
  }
  for (std::size_t j = 0; j < out.sds.size(); ++j) {
    out.sds[j] = count[j] > 1 ? std::sqrt(out.sds[j] / (count[j] - 1)) : 0.0;
  }
  return out;
}

LabelField max_likelihood_labels(const ObservationField& obs, const EmissionModel& emission) {
  const Eigen::MatrixXd log_f = log_emission_table(obs, emission);
  std::vector<int> labels(static_cast<std::size_t>(obs.size()));
  for (int i = 0; i < obs.size(); ++i) {
    Eigen::Index best = 0;
    log_f.row(i).maxCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return LabelField(emission.k(), std::move(labels));
}

GibbsInit initialize(const ObservationField& obs, int k, const OcaPlan& plan, double beta_max,
                     double beta_step, const Executor& executor) {
  if (!(beta_max >= 0.0) || !(beta_step > 0.0)) throw std::domain_error("invalid beta grid");
  std::vector<double> visible;
  for (int i = 0; i < obs.size(); ++i) {
    if (!obs.override_at(i)) visible.push_back(obs.y[static_cast<std::size_t>(i)]);
  }
  GibbsInit init{{}, kmeans(visible, k)};
  const KMeansResult& km = init.kmeans;
  double pooled = 0.0;
  for (double v : visible) pooled += v;
  pooled /= static_cast<double>(visible.size());
  double spread = 0.0;
  for (double v : visible) spread += (v - pooled) * (v - pooled);
  spread = std::sqrt(spread / static_cast<double>(visible.size()));
  const double floor = std::max(1e-6, 1e-3 * spread);

  GibbsState& state = init.state;
  state.emission.mu = km.means;
  for (double sd : km.sds) state.emission.sigma.push_back(std::max(sd, floor));
  state.z = max_likelihood_labels(obs, state.emission);

  const OcaLikelihood likelihood(plan, state.z, executor);
  double best = -std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::floor(beta_max / beta_step + 1e-9));
  for (int s = 0; s <= steps; ++s) {
    const double beta = std::min(beta_max, s * beta_step);
    const double value = likelihood(beta, executor);
    if (value > best) {
      best = value;
      state.beta = beta;
    }
  }
  return init;
}

std::vector<double> dirichlet_posterior(std::span<const double> alpha, const LabelField& field) {
  std::vector<double> out(alpha.begin(), alpha.end());
  for (int label : field.labels()) out[static_cast<std::size_t>(label)] += 1.0;
  return out;
}

std::vector<double> dirichlet_draw(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    out[j] = gamma_draw(rng, alpha[j], 1.0);
    total += out[j];
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed (tiny shapes); fall back to the largest shape.
    const auto top = std::max_element(alpha.begin(), alpha.end()) - alpha.begin();
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(top)] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

SegmentationResult gmm_gibbs(const ObservationField& obs, const Priors& priors,
                             const GmmOptions& options, GibbsState init, Rng& rng) {
  obs.validate();
  priors.validate();
  init.emission.validate();
  if (options.iterations < 1 || options.burn_in < 0 || options.burn_in >= options.iterations) {
    throw std::domain_error("need 0 <= burn_in < iterations");
  }
  const int k = init.emission.k();
  std::vector<double> alpha = options.dirichlet;
  if (alpha.empty()) alpha.assign(static_cast<std::size_t>(k), 1.0 / k);
  if (static_cast<int>(alpha.size()) != k) throw std::domain_error("need one Dirichlet parameter per class");
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::domain_error("Dirichlet parameters must be positive");
  }
  if (init.z.size() != obs.size()) init.z = LabelField::constant(k, obs.size());

  SegmentationResult result;
  result.tallies = Eigen::MatrixXi::Zero(obs.size(), k);
  result.state = std::move(init);
  GibbsState& state = result.state;
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (int iter = 1; iter <= options.iterations; ++iter) {
    state.iteration = iter;
    state.pi = dirichlet_draw(dirichlet_posterior(alpha, state.z), rng);
    state.emission = update_emission_params(state.z, obs, priors, rng);
    const Eigen::MatrixXd log_f = log_emission_table(obs, state.emission);
    for (int i = 0; i < obs.size(); ++i) {
      double peak = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double pj = state.pi[static_cast<std::size_t>(j)];
        weights[static_cast<std::size_t>(j)] =
            pj > 0.0 ? std::log(pj) + log_f(i, j) : -std::numeric_limits<double>::infinity();
        peak = std::max(peak, weights[static_cast<std::size_t>(j)]);
      }
      for (double& w : weights) w = std::exp(w - peak);
      state.z.set(i, draw_categorical(weights, rng));
    }
    result.trace.push_back({iter, 0.0, state.emission.mu, state.emission.sigma, state.pi});
    if (iter > options.burn_in) {
      for (int i = 0; i < obs.size(); ++i) ++result.tallies(i, state.z[i]);
      ++result.retained;
      if (options.on_retained) options.on_retained(state, rng);
    }
  }
  finish_summaries(result);
  return result;
}

void relabel_by_means(SegmentationResult& result) {
  const int k = result.state.emission.k();
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const auto& mu = result.state.emission.mu;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return mu[static_cast<std::size_t>(a)] < mu[static_cast<std::size_t>(b)];
  });
  std::vector<int> rank(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

  Eigen::MatrixXi tallies(result.tallies.rows(), k);
  for (int j = 0; j < k; ++j) tallies.col(rank[static_cast<std::size_t>(j)]) = result.tallies.col(j);
  result.tallies = tallies;
  EmissionModel e;
  for (int r = 0; r < k; ++r) {
    e.mu.push_back(mu[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
    e.sigma.push_back(result.state.emission.sigma[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
  }
  result.state.emission = e;
  std::vector<int> labels(static_cast<std::size_t>(result.state.z.size()));
  for (int i = 0; i < result.state.z.size(); ++i) {
    labels[static_cast<std::size_t>(i)] = rank[static_cast<std::size_t>(result.state.z[i])];
  }
  result.state.z = LabelField(k, std::move(labels));
  finish_summaries(result);
}

}  // namespace oca
