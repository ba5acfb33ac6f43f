#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace oca {

// All randomized code draws from std::mt19937_64. A (seed, stream) pair maps
// to an independent generator through std::seed_seq; replicate r of an
// experiment always uses stream r, so results do not depend on scheduling.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

/// Draw from Gamma(shape, scale).
double gamma_draw(Rng& rng, double shape, double scale);

/// Draw from the inverse gamma IG(shape, scale): 1 / Gamma(shape, 1/scale).
double inverse_gamma_draw(Rng& rng, double shape, double scale);

/// Index drawn proportionally to nonnegative `weights` (need not be normalized).
int draw_categorical(std::span<const double> weights, Rng& rng);

}  // namespace oca
