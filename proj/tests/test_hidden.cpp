#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "oca/hidden.hpp"
#include "oca/metrics.hpp"
#include "oca/sampler.hpp"
#include "oracles.hpp"
#include "timing.hpp"

using oca::EmissionModel;
using oca::LabelField;
using oca::Lattice;
using oca::ObservationField;

namespace {

std::vector<int> vec(const LabelField& z) { return {z.labels().begin(), z.labels().end()}; }

ObservationField noisy(const LabelField& z, const EmissionModel& e, std::mt19937& gen) {
  std::normal_distribution<double> noise;
  ObservationField obs;
  for (int v : z.labels()) obs.y.push_back(e.mu[v] + e.sigma[v] * noise(gen));
  return obs;
}

ObservationField random_obs(int n, double lo, double hi, std::mt19937& gen) {
  std::uniform_real_distribution<double> u(lo, hi);
  ObservationField obs;
  for (int i = 0; i < n; ++i) obs.y.push_back(u(gen));
  return obs;
}

// Block field on a 12x12 grid: left third class 0, middle 1, right 2.
LabelField stripes(int side, int k) {
  std::vector<int> z;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) z.push_back(std::min(k - 1, c * k / side));
  }
  return LabelField(k, z);
}

Eigen::MatrixXd one_hot(const LabelField& z) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(z.size(), z.k());
  for (int i = 0; i < z.size(); ++i) m(i, z[i]) = 1.0;
  return m;
}

double mixture_log(double y, const EmissionModel& e) {
  double s = 0.0;
  for (int k = 0; k < e.k(); ++k) s += oracle::normal_pdf(y, e.mu[k], e.sigma[k]);
  return std::log(s / e.k());
}

const EmissionModel kTwo{{1.0, 2.0}, {0.25, 0.25}};
const EmissionModel kThree{{1.0, 2.0, 3.0}, {0.3, 0.4, 0.5}};

}  // namespace

TEST_CASE("emission log density") {
  const EmissionModel unit{{0.0, 5.0}, {1.0, 2.0}};
  CHECK(oca::emission_logpdf(0.0, 0, unit) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(oca::emission_logpdf(0.0, 0, unit) == doctest::Approx(-0.9189385332).epsilon(1e-9));
  CHECK(oca::emission_logpdf(5.0 + 1.3, 1, unit) == oca::emission_logpdf(5.0 - 1.3, 1, unit));
  CHECK(oca::emission_logpdf(5.0, 1, unit, 100.0) ==
        doctest::Approx(-std::log(100.0) - 0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-15));

  // Trapezoid over +-12 sd.
  const int steps = 200000;
  const double lo = 5.0 - 24.0, hi = 5.0 + 24.0, h = (hi - lo) / steps;
  double integral = 0.0;
  for (int s = 0; s <= steps; ++s) {
    const double w = (s == 0 || s == steps) ? 0.5 : 1.0;
    integral += w * std::exp(oca::emission_logpdf(lo + s * h, 1, unit)) * h;
  }
  CHECK(std::abs(integral - 1.0) < 1e-8);

  CHECK_THROWS_AS((EmissionModel{{1.0, 2.0}, {0.1, 0.0}}.validate()), std::domain_error);
  ObservationField bad{{1.0, 2.0}, {std::nullopt, -1.0}};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("marginal conditional special cases") {
  std::mt19937 gen(1);
  const auto single = oca::build_oca_plan(Lattice(1, 1), 4, 2);
  const ObservationField one{{1.4}, {}};
  CHECK(oca::oca_marginal_log_conditional(single, 0, one, 0.8, kThree) ==
        doctest::Approx(mixture_log(1.4, kThree)).epsilon(1e-13));
  CHECK(oca::exact_marginal_log_likelihood(one, 0.8, kThree, Lattice(1, 1)) ==
        doctest::Approx(mixture_log(1.4, kThree)).epsilon(1e-13));

  const Lattice grid(6, 7);
  const auto obs = random_obs(grid.size(), 0.5, 3.5, gen);
  double factorized = 0.0;
  for (int i = 0; i < grid.size(); ++i) factorized += mixture_log(obs.y[static_cast<std::size_t>(i)], kThree);
  for (auto [mg, mf] : {std::pair{0, 0}, {3, 1}, {4, 2}}) {
    const auto plan = oca::build_oca_plan(grid, mg, mf);
    for (int i = 0; i < grid.size(); i += 5) {
      CHECK(oca::oca_marginal_log_conditional(plan, i, obs, 0.0, kThree) ==
            doctest::Approx(mixture_log(obs.y[static_cast<std::size_t>(i)], kThree)).epsilon(1e-12));
    }
    CHECK(oca::oca_marginal_log_likelihood(obs, 0.0, kThree, plan) == doctest::Approx(factorized).epsilon(1e-12));
  }
}

TEST_CASE("full-set marginal and posterior match enumeration") {
  std::mt19937 gen(2);
  for (auto [rows, cols] : {std::pair{1, 4}, {2, 2}, {2, 3}}) {
    const Lattice grid(rows, cols);
    const oracle::Grid g{rows, cols};
    const auto plan = oca::build_full_plan(grid);
    for (const EmissionModel& e : {kTwo, kThree}) {
      for (double beta : {0.0, 0.35, 0.8}) {
        const auto obs = random_obs(grid.size(), 0.5, 3.5, gen);
        const double want = oracle::hidden_log_marginal(g, e.mu, e.sigma, beta, obs.y);
        CHECK(std::abs(oca::oca_marginal_log_likelihood(obs, beta, e, plan) - want) < 1e-8);
        CHECK(std::abs(oca::exact_marginal_log_likelihood(obs, beta, e, grid) - want) < 1e-8);

        auto rng = oca::make_rng(static_cast<std::uint64_t>(rows * 100 + cols));
        const LabelField z = oca::random_field(grid, e.k(), rng);
        const double post = oracle::hidden_log_posterior(g, e.mu, e.sigma, beta, obs.y, vec(z));
        CHECK(std::abs(oca::oca_log_posterior(z, obs, beta, e, plan) - post) < 1e-8);
        CHECK(std::abs(oca::exact_log_posterior(z, obs, beta, e, grid) - post) < 1e-8);
      }
    }
  }
}

TEST_CASE("marginal likelihood cache and parallel evaluation") {
  std::mt19937 gen(3);
  const Lattice grid(9, 11);
  const auto plan = oca::build_oca_plan(grid, 4, 2);
  auto obs = random_obs(grid.size(), 0.5, 3.5, gen);
  obs.sd_override.assign(obs.y.size(), std::nullopt);
  obs.sd_override[7] = 100.0;
  const oca::Executor four(4);
  const oca::OcaMarginalLikelihood serial(plan, obs, kThree);
  const oca::OcaMarginalLikelihood parallel(plan, obs, kThree, four);
  for (double beta : {0.0, 0.3, 0.9}) {
    double direct = 0.0;
    for (int i = 0; i < grid.size(); ++i) direct += oca::oca_marginal_log_conditional(plan, i, obs, beta, kThree);
    CHECK(serial(beta) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(serial(beta) == parallel(beta, four));
    CHECK(serial(beta) == oca::oca_marginal_log_likelihood(obs, beta, kThree, plan, four));
  }
}

TEST_CASE("latent conditional") {
  std::mt19937 gen(4);
  const Lattice grid(7, 8);
  const auto plan = oca::build_oca_plan(grid, 6, 3);
  const auto obs = random_obs(grid.size(), 0.5, 3.5, gen);
  auto rng = oca::make_rng(4);
  const LabelField z = oca::random_field(grid, 3, rng);
  for (int i = 0; i < grid.size(); ++i) {
    const auto at_zero = oca::latent_conditional(plan, i, z, obs, 0.0, kThree);
    const double y = obs.y[static_cast<std::size_t>(i)];
    double total = 0.0;
    for (int k = 0; k < 3; ++k) total += oracle::normal_pdf(y, kThree.mu[k], kThree.sigma[k]);
    for (int k = 0; k < 3; ++k) {
      CHECK(at_zero[k] == doctest::Approx(oracle::normal_pdf(y, kThree.mu[k], kThree.sigma[k]) / total).epsilon(1e-12));
    }
    const auto p = oca::latent_conditional(plan, i, z, obs, 0.7, kThree);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-12);
  }

  // Noiseless limit.
  const EmissionModel sharp{{1.0, 2.0, 3.0}, {1e-3, 1e-3, 1e-3}};
  const ObservationField exact{{1.0, 3.0, 2.0, 2.0}, {}};
  const auto small = oca::build_oca_plan(Lattice(2, 2), 2, 1);
  const LabelField guess(3, {0, 2, 1, 1});
  for (int i = 0; i < 4; ++i) {
    CHECK(oca::latent_conditional(small, i, guess, exact, 0.5, sharp)[guess[i]] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hidden field sampling") {
  SUBCASE("noiseless recovery on 12x12") {
    const LabelField truth = stripes(12, 3);
    const EmissionModel e{{1.0, 2.0, 3.0}, {0.01, 0.01, 0.01}};
    ObservationField obs;
    for (int v : truth.labels()) obs.y.push_back(e.mu[v]);
    const auto plan = oca::build_oca_plan(Lattice(12, 12), 4, 2);
    auto rng = oca::make_rng(5);
    const LabelField z = oca::sample_hidden_field(obs, 0.35, e, plan, rng);
    int hit = 0;
    for (int i = 0; i < 144; ++i) hit += z[i] == truth[i];
    CHECK(hit >= 0.99 * 144);
  }
  SUBCASE("beta = 0 draws sites from their likelihood weights") {
    std::mt19937 gen(6);
    const Lattice grid(2, 2);
    const auto plan = oca::build_oca_plan(grid, 2, 1);
    const auto obs = random_obs(4, 1.0, 2.0, gen);
    auto rng = oca::make_rng(6);
    const int draws = 10000;
    std::vector<int> ones(4, 0);
    for (int d = 0; d < draws; ++d) {
      const LabelField z = oca::sample_hidden_field(obs, 0.0, kTwo, plan, rng);
      for (int i = 0; i < 4; ++i) ones[static_cast<std::size_t>(i)] += z[i] == 1;
    }
    for (int i = 0; i < 4; ++i) {
      const double y = obs.y[static_cast<std::size_t>(i)];
      const double f0 = oracle::normal_pdf(y, 1.0, 0.25), f1 = oracle::normal_pdf(y, 2.0, 0.25);
      const double p = f1 / (f0 + f1);
      CHECK(std::abs(ones[static_cast<std::size_t>(i)] / static_cast<double>(draws) - p) <
            3 * std::sqrt(p * (1 - p) / draws) + 1e-12);
    }
  }
  SUBCASE("joint draws on 2x3 follow the product of conditionals") {
    std::mt19937 gen(7);
    const Lattice grid(2, 3);
    const oracle::Grid g{2, 3};
    const auto plan = oca::build_full_plan(grid);
    const auto obs = random_obs(6, 1.2, 1.8, gen);
    auto rng = oca::make_rng(7);
    const int draws = 100000;
    std::map<std::vector<int>, int> counts;
    for (int d = 0; d < draws; ++d) ++counts[vec(oca::sample_hidden_field(obs, 0.5, kTwo, plan, rng))];
    double tv = 0.0;
    oracle::for_each_config(6, 2, [&](const std::vector<int>& z) {
      const double p = std::exp(oca::oca_log_posterior(LabelField(2, z), obs, 0.5, kTwo, plan));
      const auto it = counts.find(z);
      tv += std::abs((it == counts.end() ? 0.0 : it->second / static_cast<double>(draws)) - p);
    });
    CHECK(0.5 * tv < 0.02);
  }
}

TEST_CASE("normal-inverse-gamma posteriors") {
  const oca::Priors priors{{1.0, 2.0}, 0.1, 1.5, 0.135};
  const oca::ClassStats none;
  const auto vp0 = oca::variance_posterior(none, priors);
  CHECK(vp0.shape == 1.5);
  CHECK(vp0.scale == 0.135);
  const auto mp0 = oca::mean_posterior(none, 0.4, 2.0, 0.1);
  CHECK(mp0.mean == 2.0);
  CHECK(mp0.variance == doctest::Approx(0.01).epsilon(1e-15));

  const std::vector<double> y{0.81, 1.12, 0.95, 1.31, 0.77};
  ObservationField obs{y, {}};
  const LabelField z(2, {0, 0, 0, 0, 0});
  const auto stats = oca::class_stats(z, obs);
  CHECK(stats[0].count == 5);
  CHECK(stats[1].count == 0);
  const auto vp = oca::variance_posterior(stats[0], priors);
  CHECK(vp.shape == doctest::Approx(1.5 + 2.0).epsilon(1e-15));

  // Overridden sites drop out of the statistics.
  ObservationField masked = oca::hold_out(obs, {4});
  CHECK(oca::class_stats(z, masked)[0].count == 4);

  // 2-D grid oracle over (mu, sigma^2): flat prior on mu marginalizes to the
  // variance posterior; a normal prior at fixed sigma^2 gives the mean posterior.
  const int nm = 1500, ns = 3000;
  const double mlo = -4.0, mhi = 6.0, slo = 1e-4, shi = 8.0;
  const double hm = (mhi - mlo) / nm, hs = (shi - slo) / ns;
  double mass = 0.0, s_mean = 0.0;
  for (int b = 0; b < ns; ++b) {
    const double s2 = slo + (b + 0.5) * hs;
    const double log_prior = -(priors.alpha + 1) * std::log(s2) - priors.eta / s2;
    for (int a = 0; a < nm; ++a) {
      const double mu = mlo + (a + 0.5) * hm;
      double ll = log_prior;
      for (double v : y) ll += -0.5 * std::log(s2) - 0.5 * (v - mu) * (v - mu) / s2;
      const double w = std::exp(ll);
      mass += w;
      s_mean += w * s2;
    }
  }
  CHECK(std::abs(s_mean / mass - vp.scale / (vp.shape - 1)) < 1e-3);

  for (double s2 : {0.02, 0.09, 0.5}) {
    double m = 0.0, m1 = 0.0, m2 = 0.0;
    for (int a = 0; a < 200000; ++a) {
      const double mu = mlo + (a + 0.5) * (mhi - mlo) / 200000;
      double ll = -0.5 * (mu - 1.0) * (mu - 1.0) / (0.1 * 0.1);
      for (double v : y) ll += -0.5 * (v - mu) * (v - mu) / s2;
      const double w = std::exp(ll);
      m += w;
      m1 += w * mu;
      m2 += w * mu * mu;
    }
    const auto mp = oca::mean_posterior(stats[0], s2, 1.0, 0.1);
    CHECK(std::abs(m1 / m - mp.mean) < 1e-3);
    CHECK(std::abs(m2 / m - (m1 / m) * (m1 / m) - mp.variance) < 1e-3);
  }

  // Concentration.
  const oca::ClassStats many{100000, 2.5, 0.0};
  const auto vpc = oca::variance_posterior(many, priors);
  const auto mpc = oca::mean_posterior(many, vpc.scale / (vpc.shape - 1), 1.0, 0.1);
  CHECK(std::abs(mpc.mean - 2.5) < 1e-4);
  CHECK(mpc.variance < 1e-8);
}

TEST_CASE("emission update draws") {
  const oca::Priors priors{{1.0, 3.0}, 0.1, 1.5, 0.135};
  const std::vector<double> y{0.81, 1.12, 0.95, 1.31, 0.77, 1.05};
  const ObservationField obs{y, {}};
  const LabelField z(2, {0, 0, 0, 0, 0, 0});
  const auto stats = oca::class_stats(z, obs);
  const auto vp = oca::variance_posterior(stats[0], priors);
  auto rng = oca::make_rng(8);
  const int draws = 100000;
  double std_sum = 0.0, std_sq = 0.0, s2_sum = 0.0, s2_sq = 0.0;
  double prior_mu = 0.0, prior_mu_sq = 0.0, prior_prec = 0.0, prior_prec_sq = 0.0;
  for (int d = 0; d < draws; ++d) {
    const EmissionModel e = oca::update_emission_params(z, obs, priors, rng);
    const double s2 = e.sigma[0] * e.sigma[0];
    const auto mp = oca::mean_posterior(stats[0], s2, 1.0, 0.1);
    const double t = (e.mu[0] - mp.mean) / std::sqrt(mp.variance);
    std_sum += t;
    std_sq += t * t;
    s2_sum += s2;
    s2_sq += s2 * s2;
    prior_mu += e.mu[1];
    prior_mu_sq += e.mu[1] * e.mu[1];
    const double prec = 1.0 / (e.sigma[1] * e.sigma[1]);
    prior_prec += prec;
    prior_prec_sq += prec * prec;
  }
  const double n = draws;
  // Given sigma, mu is N(c_hat, sigma_hat^2).
  CHECK(std::abs(std_sum / n) < 3 / std::sqrt(n));
  CHECK(std::abs(std_sq / n - 1.0) < 3 * std::sqrt(2.0 / n));
  const double s2_mean = s2_sum / n, s2_se = std::sqrt((s2_sq / n - s2_mean * s2_mean) / n);
  CHECK(std::abs(s2_mean - vp.scale / (vp.shape - 1)) < 3 * s2_se);
  // Empty class: prior draws.
  CHECK(std::abs(prior_mu / n - 3.0) < 3 * 0.1 / std::sqrt(n));
  CHECK(std::abs(std::sqrt(prior_mu_sq / n - std::pow(prior_mu / n, 2)) - 0.1) < 0.002);
  const double prec_mean = prior_prec / n;
  const double prec_se = std::sqrt((prior_prec_sq / n - prec_mean * prec_mean) / n);
  CHECK(std::abs(prec_mean - 1.5 / 0.135) < 3 * prec_se);
}

TEST_CASE("beta Metropolis step") {
  const Lattice grid(12, 12);
  const auto plan = oca::build_oca_plan(grid, 8, 4);
  auto rng = oca::make_rng(9);
  const LabelField flat = LabelField::constant(2, 144);
  const oca::OcaLikelihood likelihood(plan, flat);
  for (int d = 0; d < 50; ++d) {
    const auto same = oca::update_beta(likelihood, 0.4, 0.0, rng);
    CHECK(same.accepted);
    CHECK(same.beta == 0.4);
  }
  int accepted = 0;
  const int trials = 4000;
  for (int d = 0; d < trials; ++d) {
    const auto step = oca::update_beta(likelihood, 0.0, 0.3, rng);
    CHECK(step.beta >= 0.0);
    CHECK(step.accepted == (step.beta > 0.0));
    accepted += step.accepted;
  }
  // Upward moves always accepted, negative ones always rejected.
  CHECK(std::abs(accepted / static_cast<double>(trials) - 0.5) < 3 * std::sqrt(0.25 / trials));
  CHECK_THROWS_AS(oca::update_beta(likelihood, -0.1, 0.1, rng), std::domain_error);

  // Long chain on a field simulated at 0.35.
  auto sim = oca::make_rng(10);
  const LabelField z = oca::swendsen_wang_sample(grid, 0.35, 2, 1000, sim);
  const oca::OcaLikelihood data(plan, z);
  double beta = 0.35, sum = 0.0, sq = 0.0;
  const int steps = 20000;
  for (int s = 0; s < steps; ++s) {
    beta = oca::update_beta(data, beta, 0.1, rng).beta;
    sum += beta;
    sq += beta * beta;
  }
  const double mean = sum / steps, sd = std::sqrt(sq / steps - mean * mean);
  CHECK(std::abs(mean - 0.35) < 3 * sd);
}

TEST_CASE("Gibbs sampler") {
  const int side = 12;
  const Lattice grid(side, side);
  const auto plan = oca::build_oca_plan(grid, 4, 2);
  const LabelField truth = stripes(side, 3);
  const oca::Priors priors{{1.0, 2.0, 3.0}, 0.1, 1.5, 0.135};
  const EmissionModel e{{1.0, 2.0, 3.0}, {0.01, 0.01, 0.01}};
  ObservationField obs;
  for (int v : truth.labels()) obs.y.push_back(e.mu[v]);

  SUBCASE("started at the truth on noiseless data") {
    auto rng = oca::make_rng(11);
    oca::GibbsOptions options;
    options.iterations = 500;
    options.burn_in = 0;
    const auto result = oca::run_gibbs(obs, priors, plan, options, {truth, 0.35, e, {}, 0}, rng);
    CHECK(result.retained == 500);
    CHECK(result.trace.size() == 500);
    CHECK(oca::brier_score(result.probabilities, truth.labels()) < 0.02);
    CHECK(result.tallies.rowwise().sum().minCoeff() == 500);
    CHECK(result.tallies.rowwise().sum().maxCoeff() == 500);
    CHECK(result.hpp == vec(truth));
  }
  SUBCASE("single retained iteration") {
    auto rng = oca::make_rng(12);
    oca::GibbsOptions options;
    options.iterations = 5;
    options.burn_in = 4;
    const auto result = oca::run_gibbs(obs, priors, plan, options, {truth, 0.35, e, {}, 0}, rng);
    CHECK(result.retained == 1);
    CHECK(result.tallies.rowwise().sum() == Eigen::VectorXi::Ones(144));
    CHECK((result.probabilities.array() == 0.0 || result.probabilities.array() == 1.0).all());
    options.burn_in = 5;
    CHECK_THROWS_AS(oca::run_gibbs(obs, priors, plan, options, {truth, 0.35, e, {}, 0}, rng), std::domain_error);
  }
  SUBCASE("seeded reproducibility") {
    std::mt19937 gen(13);
    const ObservationField data = noisy(truth, EmissionModel{{1.0, 2.0, 3.0}, {0.4, 0.4, 0.4}}, gen);
    oca::GibbsOptions options;
    options.iterations = 30;
    options.burn_in = 10;
    auto a = oca::make_rng(14);
    auto b = oca::make_rng(14);
    const oca::GibbsState init{LabelField::constant(3, 144), 0.2, {{0.5, 2.0, 3.5}, {1.0, 1.0, 1.0}}, {}, 0};
    const auto ra = oca::run_gibbs(data, priors, plan, options, init, a);
    const auto rb = oca::run_gibbs(data, priors, plan, options, init, b, oca::Executor(3));
    CHECK(ra.tallies == rb.tallies);
    CHECK(ra.state.beta == rb.state.beta);
    CHECK(ra.state.emission.mu == rb.state.emission.mu);
  }
}

TEST_CASE("held-out prediction") {
  const int side = 12;
  const Lattice grid(side, side);
  const auto plan = oca::build_oca_plan(grid, 4, 2);
  const LabelField truth = stripes(side, 3);
  const oca::Priors priors{{1.0, 2.0, 3.0}, 0.1, 1.5, 0.135};
  const EmissionModel e{{1.0, 2.0, 3.0}, {0.01, 0.01, 0.01}};
  ObservationField obs;
  for (int v : truth.labels()) obs.y.push_back(e.mu[v]);
  oca::GibbsOptions options;
  options.iterations = 200;
  options.burn_in = 100;
  const oca::GibbsState init{truth, 0.5, e, {}, 0};

  SUBCASE("empty held-out set") {
    auto a = oca::make_rng(15);
    auto b = oca::make_rng(15);
    const auto pred = oca::heldout_predict(obs, {}, priors, plan, options, init, 10, a);
    const auto plain = oca::run_gibbs(obs, priors, plan, options, init, b);
    CHECK(pred.samples.empty());
    CHECK(pred.result.tallies == plain.tallies);
    CHECK(pred.result.state.beta == plain.state.beta);
  }
  SUBCASE("held-out site inside a class-2 block") {
    const int site = grid.index(6, 6);  // 0-based (6, 6) lies in the middle stripe
    REQUIRE(truth[site] == 1);
    ObservationField masked = oca::hold_out(obs, {site});
    masked.y[static_cast<std::size_t>(site)] = 1.0;
    auto rng = oca::make_rng(16);
    const auto pred = oca::heldout_predict(masked, {site}, priors, plan, options, init, 20, rng);
    REQUIRE(pred.samples.size() == 1);
    CHECK(pred.samples[0].size() == 100 * 20);
    double mean = 0.0;
    for (double v : pred.samples[0]) mean += v;
    mean /= static_cast<double>(pred.samples[0].size());
    CHECK(std::abs(mean - 2.0) < 0.1);
    CHECK(oca::crps_empirical(pred.samples[0], 2.0) < 0.1);
  }
}

TEST_CASE("marginal likelihood cost is linear in n") {
  auto per_site = [](int side) {
    const Lattice grid(side, side);
    const auto plan = oca::build_oca_plan(grid, 4, 2);
    std::mt19937 gen(17);
    const auto obs = random_obs(grid.size(), 0.5, 3.5, gen);
    return timing::best_seconds([&] { (void)oca::oca_marginal_log_likelihood(obs, 0.4, kThree, plan); }, 3) /
           grid.size();
  };
  const double small = per_site(32);
  const double large = per_site(64);
  CHECK(large / small < 1.5);
  CHECK(small / large < 1.5);
}
