#include "eggroll/egg/tables.hpp"

#include <cmath>

#include "eggroll/egg/intops.hpp"

namespace eggroll::egg {

namespace {

LookupTables build() {
  LookupTables t;
  t.divide.resize(65536 * 256);
  for (int a = -32768; a <= 32767; ++a) {
    const std::size_t row =
        static_cast<std::size_t>(static_cast<std::uint16_t>(a)) * 256;
    t.divide[row] = 0;  // b == 0 -> 0, the only division-by-zero path
    for (int b = 1; b <= 255; ++b)
      t.divide[row + static_cast<std::size_t>(b)] = sat8(a / b);
  }
  // Startup precompute; the default FP rounding mode gives
  // round-to-nearest-even. Entries are verified bit-exactly against an
  // integer inequality in the test suite.
  for (int i = 0; i < 256; ++i)
    t.exp2[static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(std::nearbyint(16.0 * std::exp2(i / 16.0)));
  return t;
}

}  // namespace

const LookupTables& LookupTables::get() {
  static const LookupTables tables = build();
  return tables;
}

}  // namespace eggroll::egg
