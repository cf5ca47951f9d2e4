#include "eggroll/int_es.hpp"

#include <cmath>
#include <stdexcept>

#include "eggroll/prng.hpp"

namespace eggroll {

void IntTrainConfig::validate() const {
  if (pop_size < 2 || pop_size % 2 != 0)
    throw std::invalid_argument("IntTrainConfig: pop_size must be even and >= 2");
  if (sigma_shift < 0 || sigma_shift > 16)
    throw std::invalid_argument("IntTrainConfig: sigma_shift out of range");
  if (tau <= 0) throw std::invalid_argument("IntTrainConfig: tau must be > 0");
  if (segment_len < 1)
    throw std::invalid_argument("IntTrainConfig: segment_len must be >= 1");
  if (reuse_factor < 2 || reuse_factor % 2 != 0)
    throw std::invalid_argument(
        "IntTrainConfig: reuse_factor must be even and >= 2 (pairs share data)");
  if (pop_size % reuse_factor != 0)
    throw std::invalid_argument("IntTrainConfig: reuse_factor must divide pop_size");
  if (evals_per_member < 1)
    throw std::invalid_argument("IntTrainConfig: evals_per_member must be >= 1");
}

NoisePool NoisePool::build(std::uint64_t master_seed, std::size_t size) {
  if (size == 0 || (size & (size - 1)) != 0)
    throw std::invalid_argument("NoisePool: size must be a power of two");
  // Setup-time precompute; training indexes into the pool with integer
  // draws and never touches floating point itself.
  const StreamKey key = derive_stream(master_seed, 0, 0, 0xffffffffu, StreamTag::Init);
  const std::vector<double> draws = fill_gaussian(key, size, 1.0);
  NoisePool pool;
  pool.values.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const long v = std::lround(16.0 * draws[i]);
    pool.values[i] = static_cast<std::int8_t>(v > 127 ? 127 : (v < -127 ? -127 : v));
  }
  return pool;
}

}  // namespace eggroll
