// Lookup tables for the integer forward path. DIVIDE and EXP2 are real
// tables built once at startup; LOG2 is the exact integer routine in
// intops.hpp (a 2^28-entry table costs 1 GiB for nothing at this scale).
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace eggroll::egg {

struct LookupTables {
  // divide[(uint16)a * 256 + (uint8)b] = sat8(a / b) truncated toward zero,
  // with b == 0 mapped to 0. a spans all int16 bit patterns.
  std::vector<std::int8_t> divide;
  // exp2[i] = round(16 * 2^(i/16)), round-to-nearest-even; fits 20 bits.
  std::array<std::int32_t, 256> exp2;

  std::int8_t div(std::int16_t a, std::uint8_t b) const {
    return divide[static_cast<std::size_t>(static_cast<std::uint16_t>(a)) * 256 + b];
  }

  // Built on first use; immutable afterwards, shared by all threads.
  static const LookupTables& get();
};

}  // namespace eggroll::egg
