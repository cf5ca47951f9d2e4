// Scalar integer primitives for the EGG forward path. Everything in this
// header is pure integer arithmetic; the taint test compiles it with
// floating-point types poisoned.
#pragma once

#include <array>
#include <cstdint>

namespace eggroll::egg {

// Saturating cast to the symmetric int8 range. -128 is never produced.
inline std::int8_t sat8(std::int32_t v) {
  if (v > 127) return 127;
  if (v < -127) return -127;
  return static_cast<std::int8_t>(v);
}

inline std::int8_t sat8_64(std::int64_t v) {
  if (v > 127) return 127;
  if (v < -127) return -127;
  return static_cast<std::int8_t>(v);
}

// Arithmetic (sign-propagating, flooring) right shift. C++20 guarantees
// this behaviour for signed operands; spelled out as the frozen rounding
// rule for every >> in the model.
inline std::int32_t shr(std::int32_t v, int n) { return v >> n; }
inline std::int64_t shr64(std::int64_t v, int n) { return v >> n; }

namespace detail {

// out (2n limbs, zeroed) += a * a for little-endian base-2^64 limbs.
inline void big_square(const std::uint64_t* a, int n, std::uint64_t* out) {
  for (int i = 0; i < n; ++i) {
    unsigned __int128 carry = 0;
    for (int j = 0; j < n; ++j) {
      const unsigned __int128 cur =
          static_cast<unsigned __int128>(a[i]) * a[j] + out[i + j] + carry;
      out[i + j] = static_cast<std::uint64_t>(cur);
      carry = cur >> 64;
    }
    int k = i + n;
    while (carry != 0) {
      const unsigned __int128 cur = static_cast<unsigned __int128>(out[k]) + carry;
      out[k] = static_cast<std::uint64_t>(cur);
      carry = cur >> 64;
      ++k;
    }
  }
}

inline int bit_length_u64(std::uint64_t v) {
  int bits = 0;
  while (v != 0) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

}  // namespace detail

// round(16 * log2(j)) for integer j >= 1, computed exactly in integer
// arithmetic: the rounded value R is the unique integer with
// 2^(2R-1) <= j^32 < 2^(2R+1), which is floor(bitlen(j^32) / 2); ties
// cannot occur because 16*log2(j) is never a half-integer. j must fit in
// 28 bits plus change (j^32 is evaluated in 1024-bit arithmetic).
inline std::int32_t log2_q16(std::uint64_t j) {
  std::array<std::uint64_t, 32> cur{};
  std::array<std::uint64_t, 32> next{};
  cur[0] = j;
  int limbs = 1;
  for (int step = 0; step < 5; ++step) {  // j -> j^2 -> ... -> j^32
    next.fill(0);
    detail::big_square(cur.data(), limbs, next.data());
    cur = next;
    limbs *= 2;  // j^32 of a 28-bit j needs 14 limbs; 32 is ample
    while (limbs > 1 && cur[static_cast<std::size_t>(limbs - 1)] == 0) --limbs;
  }
  const int top = limbs - 1;
  const int bitlen = 64 * top + detail::bit_length_u64(cur[static_cast<std::size_t>(top)]);
  return bitlen / 2;
}

// LOG2 table semantics: round(16 * log2(i / 16)) for the 28-bit loss sums.
// Materialized as an exact on-demand routine instead of a 1 GiB table.
inline std::int32_t log2_lut(std::uint32_t i) { return log2_q16(i) - 64; }

}  // namespace eggroll::egg
