#pragma once

#include <cstdint>
#include <vector>

#include "oca/lattice.hpp"
#include "oca/parallel.hpp"
#include "oca/potts.hpp"
#include "oca/random.hpp"

namespace oca {

/// One-pass joint draw from the OCA Potts model: sites are visited in order
/// and each label is drawn from its approximate conditional given the labels
/// already drawn.
LabelField oca_sample(const OcaPlan& plan, double beta, int k, Rng& rng);

/// One Swendsen-Wang update in place: agreeing neighbor pairs are bonded with
/// probability 1 - exp(-beta) and each bonded cluster is given a uniform label.
void swendsen_wang_step(LabelField& field, double beta, const Lattice& lattice, Rng& rng);

/// Uniform iid field.
LabelField random_field(const Lattice& lattice, int k, Rng& rng);

/// Swendsen-Wang chain from a uniform random start, returning the state after
/// `sweeps` updates.
LabelField swendsen_wang_sample(const Lattice& lattice, double beta, int k, int sweeps, Rng& rng);

/// Exact distribution over all k^n configurations (k^n <= 2^20). Configuration
/// index encodes site i as digit i in base k, site 0 least significant.
class ExactDistribution {
 public:
  ExactDistribution(const Lattice& lattice, int k, double beta);

  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  LabelField decode(std::size_t index) const;
  std::size_t encode(const LabelField& field) const;
  LabelField sample(Rng& rng) const;

 private:
  int k_;
  int n_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

LabelField exact_sample(const Lattice& lattice, double beta, int k, Rng& rng);

enum class SamplerKind { oca, swendsen_wang };

struct SummaryRow {
  double beta = 0.0;
  int replicate = 0;
  int stat = 0;
};

struct SummaryStats {
  double beta = 0.0;
  double mean = 0.0;
  double sd = 0.0;
};

struct SummaryExperiment {
  Lattice lattice{1, 1};
  int k = 3;
  std::vector<double> betas;
  int replicates = 60;
  SamplerKind sampler = SamplerKind::oca;
  int past_size = 8;    // OCA only
  int future_size = 4;  // OCA only
  int sweeps = 500;     // Swendsen-Wang only
  std::uint64_t seed = 1;
};

/// Draws `replicates` fields per beta and records S(z). Replicate r at beta
/// index b uses RNG stream b * replicates + r.
std::vector<SummaryRow> run_summary_experiment(const SummaryExperiment& experiment,
                                               const Executor& executor = serial_executor());

/// Mean and sample standard deviation of S per beta, in input order.
std::vector<SummaryStats> summarize(const std::vector<SummaryRow>& rows);

}  // namespace oca
