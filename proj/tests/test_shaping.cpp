#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eggroll/shaping.hpp"

using namespace eggroll;

TEST_CASE("centered_rank maps onto [-0.5, 0.5] with tie averaging") {
  const auto r = centered_rank({3.0, 1.0, 2.0});
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(r[1] == doctest::Approx(-0.5));
  CHECK(r[2] == doctest::Approx(0.0));

  const auto ties = centered_rank({7.0, 7.0, 7.0, 7.0});
  for (double v : ties) CHECK(v == doctest::Approx(0.0));

  const auto single = centered_rank({5.0});
  CHECK(single[0] == 0.0);
}

TEST_CASE("centered_rank is permutation-equivariant and zero-sum") {
  std::mt19937 rng(7);
  std::vector<double> f(17);
  for (auto& v : f) v = std::uniform_int_distribution<int>(0, 9)(rng);  // force ties
  const auto base = centered_rank(f);

  std::vector<std::size_t> perm(f.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> fp(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fp[i] = f[perm[i]];
  const auto shuffled = centered_rank(fp);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(shuffled[i] == doctest::Approx(base[perm[i]]));

  const double sum = std::accumulate(base.begin(), base.end(), 0.0);
  CHECK(std::abs(sum) < 1e-12);
}

TEST_CASE("antithetic_sign") {
  CHECK(antithetic_sign(5.0, 3.0) == 1);
  CHECK(antithetic_sign(3.0, 3.0) == 0);
  CHECK(antithetic_sign(-2.0, 4.0) == -1);
  for (double a : {-1.5, 0.0, 2.25})
    for (double b : {-1.5, 0.0, 2.25})
      CHECK(antithetic_sign(a, b) == -antithetic_sign(b, a));
}

TEST_CASE("group_z_score") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(3, 4, 2.5);
  for (double v : group_z_score(constant)) CHECK(v == doctest::Approx(0.0));

  // m = 1 reduces to (row - mean) / global std
  Eigen::MatrixXd one_row(1, 4);
  one_row << 1.0, 2.0, 3.0, 4.0;
  const double mean = 2.5;
  const double sd = std::sqrt(((1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) +
                               (3 - mean) * (3 - mean) + (4 - mean) * (4 - mean)) /
                              4.0);
  const auto z = group_z_score(one_row);
  for (int j = 0; j < 4; ++j)
    CHECK(z[static_cast<std::size_t>(j)] ==
          doctest::Approx((one_row(0, j) - mean) / sd));

  // the identity matrix of scores cancels per member
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.0, 0.0, 1.0;
  const auto zs = group_z_score(s);
  CHECK(zs[0] == doctest::Approx(0.0));
  CHECK(zs[1] == doctest::Approx(0.0));

  // shift invariance: bitwise when every intermediate is exact (integer
  // entries, exact means and variance), last-ulp otherwise
  Eigen::MatrixXd ints(2, 2);
  ints << 1, 3, 5, 7;  // row means 2 and 6, global mean 4, variance 5: all exact
  const auto ib = group_z_score(ints);
  const auto is = group_z_score((ints.array() + 64.0).matrix());
  for (std::size_t i = 0; i < ib.size(); ++i) CHECK(ib[i] == is[i]);

  Eigen::MatrixXd raw(3, 5);
  raw.setRandom();
  const auto base = group_z_score(raw);
  const auto shifted = group_z_score((raw.array() + 13.25).matrix());
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i] == doctest::Approx(shifted[i]).epsilon(1e-13));

  // degenerate all-equal batch guarded by eps
  const auto deg = group_z_score(Eigen::MatrixXd::Zero(2, 3), 1e-8);
  for (double v : deg) CHECK(std::isfinite(v));
}
