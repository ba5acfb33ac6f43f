#include "oca/random.hpp"

#include <stdexcept>

namespace oca {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double gamma_draw(Rng& rng, double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(rng);
}

double inverse_gamma_draw(Rng& rng, double shape, double scale) {
  return 1.0 / gamma_draw(rng, shape, 1.0 / scale);
}

int draw_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::domain_error("categorical weights sum to zero");
  const double u = uniform01(rng) * total;
  double running = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    running += weights[j];
    if (u < running) return static_cast<int>(j);
  }
  // Rounding can leave u at the total; return the last positive weight.
  for (std::size_t j = weights.size(); j-- > 0;) {
    if (weights[j] > 0.0) return static_cast<int>(j);
  }
  return 0;
}

}  // namespace oca
