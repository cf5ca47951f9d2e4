#pragma once

#include <cstddef>
#include <vector>

#include "eggroll/prng_core.hpp"

namespace eggroll {

// Uniform double in the open interval (0, 1).
inline double u64_to_unit(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Inverse standard normal CDF (Wichura's PPND16), accurate to ~1e-15.
// Chosen over Box-Muller so draw k is addressable independently of draw k-1.
double normal_icdf(double p);

// i.i.d. N(0, sigma0^2) draws; deterministic in key. Throws
// std::invalid_argument for sigma0 <= 0. Draw k uses uniform draw k, so
// sub-ranges can be regenerated with U64Stream::at.
std::vector<double> fill_gaussian(const StreamKey& key, std::size_t count, double sigma0);

// i.i.d. generalized Gaussian GG(s, p) draws, density ~ exp(-|x/s|^p).
// p=2 is Gaussian with variance s^2/2, p=1 is Laplace. Sampled exactly via
// |x| = s * G^(1/p) with G ~ Gamma(1/p, 1); rejection draws come from the
// same stream, so the sequence stays a pure function of the key.
std::vector<double> fill_ggd(const StreamKey& key, std::size_t count, double s, double p);

// Single gamma variate, shape alpha > 0, unit scale, consuming from stream.
double gamma_draw(U64Stream& stream, double alpha);

}  // namespace eggroll
