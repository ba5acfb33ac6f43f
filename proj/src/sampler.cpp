#include "oca/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "oca/errors.hpp"
#include "oca/window_sum.hpp"

namespace oca {

LabelField oca_sample(const OcaPlan& plan, double beta, int k, Rng& rng) {
  const int n = plan.size();
  LabelField field = LabelField::constant(k, n);
  detail::WindowSum sum;
  std::vector<int> fixed;
  std::vector<double> log_mass(static_cast<std::size_t>(k));
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const SiteWindow& w = plan.window(i);
    fixed.resize(w.past.size());
    for (std::size_t j = 0; j < w.past.size(); ++j) fixed[j] = field[w.past[j]];
    sum.run(k, w.first_past_slot(), plan.conditional_pairs(i), fixed);
    for (int label = 0; label < k; ++label) {
      log_mass[static_cast<std::size_t>(label)] = detail::log_weighted_sum(sum.row(label), beta);
    }
    const double peak = *std::max_element(log_mass.begin(), log_mass.end());
    for (int label = 0; label < k; ++label) {
      weights[static_cast<std::size_t>(label)] = std::exp(log_mass[static_cast<std::size_t>(label)] - peak);
    }
    field.set(i, draw_categorical(weights, rng));
  }
  return field;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) {
    parent[static_cast<std::size_t>(b)] = a;
  } else {
    parent[static_cast<std::size_t>(a)] = b;
  }
}

}  // namespace

void swendsen_wang_step(LabelField& field, double beta, const Lattice& lattice, Rng& rng) {
  check_field(field, lattice);
  const double bond = -std::expm1(-beta);
  const int n = lattice.size();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i) {
    const int r = lattice.row(i);
    const int c = lattice.col(i);
    if (c + 1 < lattice.cols() && field[i] == field[i + 1] && uniform01(rng) < bond) {
      unite(parent, i, i + 1);
    }
    if (r + 1 < lattice.rows() && field[i] == field[i + lattice.cols()] &&
        uniform01(rng) < bond) {
      unite(parent, i, i + lattice.cols());
    }
  }
  // Roots are the smallest site of their cluster, so clusters get fresh
  // labels in site order.
  std::vector<int> cluster_label(static_cast<std::size_t>(n), -1);
  std::uniform_int_distribution<int> pick(0, field.k() - 1);
  for (int i = 0; i < n; ++i) {
    const int root = find_root(parent, i);
    int& label = cluster_label[static_cast<std::size_t>(root)];
    if (label < 0) label = pick(rng);
    field.set(i, label);
  }
}

LabelField random_field(const Lattice& lattice, int k, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> labels(static_cast<std::size_t>(lattice.size()));
  for (int& l : labels) l = pick(rng);
  return LabelField(k, std::move(labels));
}

LabelField swendsen_wang_sample(const Lattice& lattice, double beta, int k, int sweeps, Rng& rng) {
  LabelField field = random_field(lattice, k, rng);
  for (int s = 0; s < sweeps; ++s) swendsen_wang_step(field, beta, lattice, rng);
  return field;
}

ExactDistribution::ExactDistribution(const Lattice& lattice, int k, double beta)
    : k_(k), n_(lattice.size()) {
  check_enumerable(lattice, k, 1048576.0);
  const auto total = static_cast<std::size_t>(std::llround(std::pow(k, n_)));
  std::vector<double> log_weight(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    log_weight[idx] = log_potential(decode(idx), lattice, beta);
  }
  const double peak = *std::max_element(log_weight.begin(), log_weight.end());
  probabilities_.resize(total);
  double norm = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    probabilities_[idx] = std::exp(log_weight[idx] - peak);
    norm += probabilities_[idx];
  }
  cumulative_.resize(total);
  double running = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    probabilities_[idx] /= norm;
    running += probabilities_[idx];
    cumulative_[idx] = running;
  }
}

LabelField ExactDistribution::decode(std::size_t index) const {
  std::vector<int> labels(static_cast<std::size_t>(n_));
  for (int& l : labels) {
    l = static_cast<int>(index % static_cast<std::size_t>(k_));
    index /= static_cast<std::size_t>(k_);
  }
  return LabelField(k_, std::move(labels));
}

std::size_t ExactDistribution::encode(const LabelField& field) const {
  std::size_t index = 0;
  for (int i = field.size() - 1; i >= 0; --i) {
    index = index * static_cast<std::size_t>(k_) + static_cast<std::size_t>(field[i]);
  }
  return index;
}

LabelField ExactDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto index = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                           cumulative_.size() - 1);
  return decode(index);
}

LabelField exact_sample(const Lattice& lattice, double beta, int k, Rng& rng) {
  return ExactDistribution(lattice, k, beta).sample(rng);
}

std::vector<SummaryRow> run_summary_experiment(const SummaryExperiment& experiment,
                                               const Executor& executor) {
  const auto replicates = static_cast<std::size_t>(experiment.replicates);
  std::vector<SummaryRow> rows(experiment.betas.size() * replicates);
  const OcaPlan plan = experiment.sampler == SamplerKind::oca
                           ? build_oca_plan(experiment.lattice, experiment.past_size,
                                            experiment.future_size, {}, executor)
                           : build_oca_plan(experiment.lattice, 0, 0);
  executor.for_each(rows.size(), [&](std::size_t job) {
    const double beta = experiment.betas[job / replicates];
    Rng rng = make_rng(experiment.seed, job);
    const LabelField field =
        experiment.sampler == SamplerKind::oca
            ? oca_sample(plan, beta, experiment.k, rng)
            : swendsen_wang_sample(experiment.lattice, beta, experiment.k, experiment.sweeps, rng);
    rows[job] = {beta, static_cast<int>(job % replicates), summary_stat(field, experiment.lattice)};
  });
  return rows;
}

std::vector<SummaryStats> summarize(const std::vector<SummaryRow>& rows) {
  std::vector<SummaryStats> out;
  std::vector<std::vector<double>> groups;
  for (const SummaryRow& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SummaryStats& s) { return s.beta == row.beta; });
    if (it == out.end()) {
      out.push_back({row.beta, 0.0, 0.0});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(row.stat);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& v = groups[g];
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[g].mean = mean;
    out[g].sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

}  // namespace oca
