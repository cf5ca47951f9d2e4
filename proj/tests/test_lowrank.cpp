#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "eggroll/lowrank.hpp"

using namespace eggroll;

namespace {

StreamKey ka(std::uint32_t w, std::uint32_t l = 0) {
  return derive_stream(42, 0, w, l, StreamTag::FactorA);
}
StreamKey kb(std::uint32_t w, std::uint32_t l = 0) {
  return derive_stream(42, 0, w, l, StreamTag::FactorB);
}

}  // namespace

TEST_CASE("sample_factors shapes and determinism") {
  const auto f = sample_factors<double>(ka(0), kb(0), 4, 3, 1, FactorDist::gaussian(1.0));
  CHECK(f.A.rows() == 4);
  CHECK(f.A.cols() == 1);
  CHECK(f.B.rows() == 3);
  CHECK(f.B.cols() == 1);
  CHECK(f.scale() == 1.0);

  const auto g = sample_factors<double>(ka(0), kb(0), 4, 3, 1, FactorDist::gaussian(1.0));
  CHECK(f.A == g.A);
  CHECK(f.B == g.B);

  CHECK_THROWS_AS(
      sample_factors<double>(ka(0), kb(0), 0, 3, 1, FactorDist::gaussian(1.0)),
      std::invalid_argument);
}

TEST_CASE("rank exceeding min(m,n) warns but proceeds") {
  static int warnings = 0;
  warnings = 0;
  set_warn_handler([](const std::string&) { ++warnings; });
  const auto f = sample_factors<double>(ka(1), kb(1), 3, 3, 5, FactorDist::gaussian(1.0));
  set_warn_handler(nullptr);
  CHECK(warnings == 1);
  CHECK(f.A.cols() == 5);
}

TEST_CASE("materialize matches the outer-product definition") {
  FactorsD f;
  f.rank = 1;
  f.A.resize(2, 1);
  f.A << 1.0, 0.0;
  f.B.resize(2, 1);
  f.B << 2.0, 3.0;
  const MatrixD e = materialize(f);
  CHECK(e(0, 0) == 2.0);
  CHECK(e(0, 1) == 3.0);
  CHECK(e(1, 0) == 0.0);
  CHECK(e(1, 1) == 0.0);

  // r = 2: (a1 b1^T + a2 b2^T) / sqrt(2)
  const auto f2 = sample_factors<double>(ka(2), kb(2), 5, 4, 2, FactorDist::gaussian(1.0));
  const MatrixD direct = (f2.A.col(0) * f2.B.col(0).transpose() +
                          f2.A.col(1) * f2.B.col(1).transpose()) /
                         std::sqrt(2.0);
  CHECK((materialize(f2) - direct).cwiseAbs().maxCoeff() < 1e-14);

  f.A.setZero();
  CHECK(materialize(f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("perturbation entries are zero-mean unit-variance for any rank") {
  // Var of an entry of (1/sqrt(r)) A B^T is sigma0^4 = 1, independent of r.
  for (const int r : {1, 4}) {
    double sum = 0.0, sq = 0.0;
    std::int64_t count = 0;
    for (int s = 0; s < 2500; ++s) {
      const auto f = sample_factors<double>(ka(static_cast<std::uint32_t>(s), 7),
                                            kb(static_cast<std::uint32_t>(s), 7), 8, 8,
                                            r, FactorDist::gaussian(1.0));
      const MatrixD e = materialize(f);
      sum += e.sum();
      sq += e.squaredNorm();
      count += e.size();
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sq / static_cast<double>(count) - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("perturbed_forward equals the dense oracle") {
  // sigma = 0 reduces to mu * x exactly.
  const auto f = sample_factors<float>(ka(3), kb(3), 6, 5, 2, FactorDist::gaussian(1.0));
  MatrixF mu = MatrixF::Random(6, 5);
  VectorF x = VectorF::Random(5);
  const VectorF y0 = perturbed_forward(x, mu, f, 0.0);
  const VectorF dense0 = (mu.cast<double>() * x.cast<double>()).cast<float>();
  CHECK((y0 - dense0).cwiseAbs().maxCoeff() == 0.0f);

  // float path within 1e-5 relative of the dense oracle
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = static_cast<std::uint32_t>(100 + trial);
    const auto ff = sample_factors<float>(ka(w), kb(w), 8, 8, 1, FactorDist::gaussian(1.0));
    MatrixF m8 = MatrixF::Random(8, 8);
    VectorF x8 = VectorF::Random(8);
    const VectorF got = perturbed_forward(x8, m8, ff, 0.1);
    const MatrixD dense = m8.cast<double>() + 0.1 * materialize(ff).cast<double>();
    const VectorD want = dense * x8.cast<double>();
    const double rel = (got.cast<double>() - want).norm() / (want.norm() + 1e-30);
    CHECK(rel < 1e-5);
  }

  // double path within 1e-12
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = static_cast<std::uint32_t>(200 + trial);
    const auto fd = sample_factors<double>(ka(w), kb(w), 16, 12, 3,
                                           FactorDist::gaussian(1.0));
    MatrixD m = MatrixD::Random(16, 12);
    VectorD x12 = VectorD::Random(12);
    const VectorD got = perturbed_forward(x12, m, fd, 0.37);
    const VectorD want = (m + 0.37 * materialize(fd)) * x12;
    CHECK((got - want).norm() / want.norm() < 1e-12);
  }

  MatrixF mu_bad = MatrixF::Random(4, 4);
  VectorF x_bad = VectorF::Random(5);
  const auto fb = sample_factors<float>(ka(4), kb(4), 4, 4, 1, FactorDist::gaussian(1.0));
  CHECK_THROWS_AS(perturbed_forward(x_bad, mu_bad, fb, 0.1), std::invalid_argument);
}

TEST_CASE("population batch: each member matches its own dense oracle") {
  MatrixD mu = MatrixD::Random(10, 7);
  for (int member = 0; member < 32; ++member) {
    const auto w = static_cast<std::uint32_t>(member);
    const auto f = sample_factors<double>(ka(w, 1), kb(w, 1), 10, 7, 1,
                                          FactorDist::gaussian(1.0));
    VectorD x = VectorD::Random(7);
    const VectorD got = perturbed_forward(x, mu, f, 0.25);
    const VectorD want = (mu + 0.25 * materialize(f)) * x;
    CHECK((got - want).norm() / want.norm() < 1e-12);
  }
}

TEST_CASE("aggregate_update equals the materialized-sum oracle") {
  std::vector<FactorsD> factors;
  std::vector<double> fit;
  for (int w = 0; w < 9; ++w) {
    factors.push_back(sample_factors<double>(ka(static_cast<std::uint32_t>(w), 2),
                                             kb(static_cast<std::uint32_t>(w), 2), 7, 6,
                                             2, FactorDist::gaussian(1.0)));
    fit.push_back(0.3 * (w - 4));
  }
  const MatrixD got = aggregate_update<double>(factors, fit);
  MatrixD want = MatrixD::Zero(7, 6);
  for (std::size_t w = 0; w < factors.size(); ++w)
    want += fit[w] * materialize(factors[w]);
  want /= static_cast<double>(factors.size());
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);

  // all-zero fitness -> zero update
  std::vector<double> zeros(factors.size(), 0.0);
  CHECK(aggregate_update<double>(factors, zeros).cwiseAbs().maxCoeff() == 0.0);

  // antithetic cancellation: (+E, -E) with equal fitness cancels (exactly
  // in real arithmetic; FMA inside the stacked product leaves the rounding
  // residual of a single multiply)
  std::vector<FactorsD> pair = {factors[0], factors[0]};
  pair[1].A = -pair[1].A;
  std::vector<double> same = {0.7, 0.7};
  CHECK(aggregate_update<double>(pair, same).cwiseAbs().maxCoeff() < 1e-15);

  std::vector<FactorsD> empty;
  CHECK_THROWS_AS(aggregate_update<double>(empty, std::vector<double>{}),
                  std::invalid_argument);
}

TEST_CASE("update rank law min(Nr, m, n)") {
  std::vector<FactorsD> factors;
  std::vector<double> fit;
  for (int w = 0; w < 2; ++w) {
    factors.push_back(sample_factors<double>(ka(static_cast<std::uint32_t>(w), 3),
                                             kb(static_cast<std::uint32_t>(w), 3), 6, 6,
                                             1, FactorDist::gaussian(1.0)));
    fit.push_back(w + 1.0);
  }
  CHECK(numerical_rank(aggregate_update<double>(factors, fit)) == 2);
}
