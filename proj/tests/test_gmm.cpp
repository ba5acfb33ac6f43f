#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "oca/gmm.hpp"
#include "oca/metrics.hpp"

using oca::EmissionModel;
using oca::LabelField;
using oca::ObservationField;

namespace {

double wcss(const std::vector<double>& y, const std::vector<int>& labels, const std::vector<double>& means) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::pow(y[i] - means[static_cast<std::size_t>(labels[i])], 2);
  return s;
}

}  // namespace

TEST_CASE("k-means") {
  std::mt19937 gen(1);
  std::normal_distribution<double> noise(0.0, 1.0);

  SUBCASE("single cluster") {
    std::vector<double> y(50);
    for (double& v : y) v = 3.0 + noise(gen);
    const auto fit = oca::kmeans(y, 1);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 50;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    CHECK(fit.means[0] == doctest::Approx(mean).epsilon(1e-13));
    CHECK(fit.sds[0] == doctest::Approx(std::sqrt(ss / 49)).epsilon(1e-13));
    CHECK(fit.converged);
  }
  SUBCASE("separated clouds") {
    std::vector<double> y;
    std::vector<int> truth;
    for (int i = 0; i < 80; ++i) {
      const int c = static_cast<int>(gen() % 2);
      y.push_back(c * 100.0 + noise(gen));
      truth.push_back(c);
    }
    const auto fit = oca::kmeans(y, 2);
    const bool same = fit.labels == truth;
    std::vector<int> flipped;
    for (int c : truth) flipped.push_back(1 - c);
    CHECK((same || fit.labels == flipped));
  }
  SUBCASE("objective never increases") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> y(200);
      std::exponential_distribution<double> skew(1.0);
      for (double& v : y) v = skew(gen) + (gen() % 3) * 2.0;
      const int k = 2 + trial % 5;
      const auto fit = oca::kmeans(y, k);
      REQUIRE_FALSE(fit.objective.empty());
      for (std::size_t t = 1; t < fit.objective.size(); ++t) CHECK(fit.objective[t] <= fit.objective[t - 1] + 1e-9);
      CHECK(fit.objective.back() == doctest::Approx(wcss(y, fit.labels, fit.means)).epsilon(1e-12));
      CHECK(fit.labels == oca::kmeans(y, k).labels);
    }
  }
  SUBCASE("degenerate inputs") {
    const std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(oca::kmeans(y, 3), std::domain_error);
    const std::vector<double> ties{5.0, 5.0, 5.0, 5.0};
    const auto fit = oca::kmeans(ties, 2);
    CHECK(fit.labels.size() == 4);
  }
}

TEST_CASE("Dirichlet conjugacy") {
  const std::vector<double> alpha{0.25, 0.5, 1.0};
  const LabelField z(3, {0, 2, 2, 1, 2, 0});
  const auto post = oca::dirichlet_posterior(alpha, z);
  CHECK(post == std::vector<double>{2.25, 1.5, 4.0});

  auto rng = oca::make_rng(2);
  std::vector<double> mean(3, 0.0);
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto pi = oca::dirichlet_draw(post, rng);
    CHECK(std::abs(pi[0] + pi[1] + pi[2] - 1.0) < 1e-12);
    for (int j = 0; j < 3; ++j) mean[static_cast<std::size_t>(j)] += pi[static_cast<std::size_t>(j)] / draws;
  }
  const double a0 = 7.75;
  for (int j = 0; j < 3; ++j) {
    const double m = post[static_cast<std::size_t>(j)] / a0;
    const double sd = std::sqrt(m * (1 - m) / (a0 + 1));
    CHECK(std::abs(mean[static_cast<std::size_t>(j)] - m) < 3 * sd / std::sqrt(draws));
  }
}

TEST_CASE("GMM Gibbs sampler") {
  const oca::Priors priors{{1.0, 2.0}, 0.1, 1.5, 0.135};
  const EmissionModel start{{1.0, 2.0}, {0.5, 0.5}};

  SUBCASE("no data leaves the priors") {
    const ObservationField empty;
    auto rng = oca::make_rng(3);
    oca::GmmOptions options;
    options.iterations = 4000;
    options.burn_in = 0;
    const auto result = oca::gmm_gibbs(empty, priors, options, {LabelField(2, {}), 0.0, start, {}, 0}, rng);
    double mu = 0.0, pi = 0.0;
    for (const auto& row : result.trace) {
      mu += row.mu[0] / 4000;
      pi += row.pi[0] / 4000;
    }
    CHECK(std::abs(mu - 1.0) < 0.01);
    CHECK(std::abs(pi - 0.5) < 0.03);  // Dirichlet(1/2, 1/2) mean
  }
  SUBCASE("identical observations collapse into one class") {
    const ObservationField obs{std::vector<double>(40, 1.0), {}};
    auto rng = oca::make_rng(4);
    oca::GmmOptions options;
    options.iterations = 200;
    options.burn_in = 100;
    const auto result = oca::gmm_gibbs(obs, priors, options, {LabelField::constant(2, 40), 0.0, start, {}, 0}, rng);
    const auto& z = result.state.z;
    const int ones = static_cast<int>(std::count(z.labels().begin(), z.labels().end(), 1));
    CHECK((ones == 0 || ones == 40));
    const auto post = oca::dirichlet_posterior(std::vector<double>{0.5, 0.5}, z);
    CHECK(std::max(post[0], post[1]) == 40.5);
    CHECK(std::min(post[0], post[1]) == 0.5);
    for (Eigen::Index i = 0; i < result.probabilities.rows(); ++i) {
      CHECK(std::abs(result.probabilities.row(i).sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("GMM agrees with the hidden model at beta = 0") {
  std::mt19937 gen(5);
  const oca::Lattice grid(40, 40);
  const auto plan = oca::build_oca_plan(grid, 4, 2);
  const EmissionModel e{{1.0, 2.0}, {0.4, 0.4}};
  std::vector<int> labels;
  ObservationField obs;
  std::normal_distribution<double> noise;
  for (int i = 0; i < 1600; ++i) {
    labels.push_back(i % 2);
    obs.y.push_back(e.mu[static_cast<std::size_t>(i % 2)] + 0.4 * noise(gen));
  }
  const oca::Priors priors{{1.0, 2.0}, 0.1, 1.5, 0.135};
  const oca::GibbsState init{LabelField(2, labels), 0.0, e, {}, 0};

  auto a = oca::make_rng(6);
  oca::GmmOptions gmm;
  gmm.iterations = 3000;
  gmm.burn_in = 1000;
  gmm.dirichlet = {1e6, 1e6};  // weights pinned near 1/2, as in the hidden model
  const auto mixture = oca::gmm_gibbs(obs, priors, gmm, init, a);

  auto b = oca::make_rng(7);
  oca::GibbsOptions potts;
  potts.iterations = 3000;
  potts.burn_in = 1000;
  potts.proposal_sd = 0.0;  // pins beta at 0
  const auto hidden = oca::run_gibbs(obs, priors, plan, potts, init, b);
  CHECK(hidden.state.beta == 0.0);

  const double diff = (mixture.probabilities - hidden.probabilities).cwiseAbs().mean();
  CHECK(diff < 0.015);
}

TEST_CASE("initialization") {
  const oca::Lattice grid(8, 8);
  const auto plan = oca::build_oca_plan(grid, 4, 2);
  ObservationField obs;
  for (int i = 0; i < 64; ++i) obs.y.push_back(i % 8 < 4 ? 1.0 + 0.01 * (i % 3) : 3.0 - 0.01 * (i % 2));
  obs = oca::hold_out(obs, {5});
  obs.y[5] = 1e6;  // ignored by k-means
  const auto init = oca::initialize_gibbs(obs, 2, plan);
  CHECK(init.emission.mu[0] == doctest::Approx(1.01).epsilon(0.01));
  CHECK(init.emission.mu[1] == doctest::Approx(2.995).epsilon(0.01));
  CHECK(init.z[0] == 0);
  CHECK(init.z[7] == 1);
  CHECK(init.beta > 0.5);
  CHECK(init.beta <= 2.0);
}

TEST_CASE("relabel by means") {
  oca::SegmentationResult r;
  r.state.emission = {{3.0, 1.0}, {0.1, 0.2}};
  r.state.z = LabelField(2, {0, 1, 1});
  r.tallies = Eigen::MatrixXi(3, 2);
  r.tallies << 5, 0, 1, 4, 0, 5;
  r.retained = 5;
  oca::finish_summaries(r);
  oca::relabel_by_means(r);
  CHECK(r.state.emission.mu == std::vector<double>{1.0, 3.0});
  CHECK(r.state.emission.sigma == std::vector<double>{0.2, 0.1});
  CHECK(r.state.z == LabelField(2, {1, 0, 0}));
  CHECK(r.hpp == std::vector<int>{1, 0, 0});
  CHECK(r.tallies(0, 1) == 5);
  CHECK(r.probabilities(1, 0) == doctest::Approx(0.8));
}
