// Build-level integer-purity check: every header on the integer path
// (counter RNG core, EGG forward ops, lookup tables, integer training) is
// compiled with the floating-point type names poisoned. Any float or
// double token reaching these headers is a compile error, so this test
// existing in the binary is the proof.
#include <doctest.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#pragma GCC poison float double

#include "eggroll/egg/intops.hpp"
#include "eggroll/egg/model.hpp"
#include "eggroll/egg/tables.hpp"
#include "eggroll/int_es.hpp"
#include "eggroll/prng_core.hpp"

TEST_CASE("integer path compiles with floating-point types poisoned") {
  CHECK(eggroll::egg::sat8(1000) == 127);
  CHECK(eggroll::egg::sat8(-1000) == -127);
  CHECK(eggroll::egg::log2_q16(16) == 64);
}
