// Low-rank perturbation algebra: sample factor pairs (A, B), push inputs
// through mu + sigma * (1/sqrt(r)) A B^T without materializing the
// perturbation, and aggregate fitness-weighted updates as one stacked
// matrix product.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "eggroll/prng.hpp"

namespace eggroll {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatrixD = MatX<double>;
using MatrixF = MatX<float>;
using VectorD = VecX<double>;
using VectorF = VecX<float>;

// Entry distribution for factor sampling.
struct FactorDist {
  enum class Kind { Gaussian, Ggd } kind = Kind::Gaussian;
  double sigma0 = 1.0;  // Gaussian std
  double s = 1.0;       // GGD scale
  double p = 2.0;       // GGD shape

  static FactorDist gaussian(double sigma0) { return {Kind::Gaussian, sigma0, 0, 0}; }
  static FactorDist ggd(double s, double p) { return {Kind::Ggd, 0, s, p}; }
};

using WarnHandler = void (*)(const std::string&);
void set_warn_handler(WarnHandler h);  // nullptr restores the stderr default
void warn(const std::string& msg);

template <typename S>
struct LowRankFactors {
  MatX<S> A;  // m x r
  MatX<S> B;  // n x r
  int rank = 1;

  // Fixed 1/sqrt(r) so entrywise variance of the perturbation is O(1) in r.
  double scale() const { return 1.0 / std::sqrt(static_cast<double>(rank)); }
};

using FactorsD = LowRankFactors<double>;
using FactorsF = LowRankFactors<float>;

namespace detail {

// Draw index (row, col) -> col * rows + row, so rank r consumes exactly the
// first r*rows draws of the stream. Nesting lets different ranks share
// common random numbers.
template <typename S>
MatX<S> sample_matrix(const StreamKey& key, int rows, int cols, const FactorDist& dist) {
  std::vector<double> draws =
      dist.kind == FactorDist::Kind::Gaussian
          ? fill_gaussian(key, static_cast<std::size_t>(rows) * cols, dist.sigma0)
          : fill_ggd(key, static_cast<std::size_t>(rows) * cols, dist.s, dist.p);
  MatX<S> m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r)
      m(r, c) = static_cast<S>(draws[static_cast<std::size_t>(c) * rows + r]);
  return m;
}

}  // namespace detail

template <typename S>
LowRankFactors<S> sample_factors(const StreamKey& key_a, const StreamKey& key_b, int m,
                                 int n, int r, const FactorDist& dist) {
  if (m < 1 || n < 1 || r < 1) throw std::invalid_argument("sample_factors: dims must be >= 1");
  if (r > std::min(m, n)) {
    warn("sample_factors: rank " + std::to_string(r) + " exceeds min(m,n)=" +
         std::to_string(std::min(m, n)) + "; perturbation is effectively full-rank");
  }
  return {detail::sample_matrix<S>(key_a, m, r, dist),
          detail::sample_matrix<S>(key_b, n, r, dist), r};
}

// Dense (1/sqrt(r)) A B^T. Test oracle only; not on the hot path.
template <typename S>
MatX<S> materialize(const LowRankFactors<S>& f) {
  if constexpr (std::is_same_v<S, float>) {
    MatrixD dense = f.A.template cast<double>() * f.B.template cast<double>().transpose();
    return (f.scale() * dense).template cast<float>();
  } else {
    return static_cast<S>(f.scale()) * (f.A * f.B.transpose());
  }
}

// y = (mu + sigma * (1/sqrt(r)) A B^T) x, computed as mu*x plus the rank-r
// correction A (B^T x); cost O(mn + r(m+n)) instead of forming the dense
// perturbed matrix. 32-bit inputs accumulate in 64-bit.
template <typename S>
VecX<S> perturbed_forward(const VecX<S>& x, const MatX<S>& mu, const LowRankFactors<S>& f,
                          double sigma) {
  if (x.size() != mu.cols() || f.A.rows() != mu.rows() || f.B.rows() != mu.cols())
    throw std::invalid_argument("perturbed_forward: dimension mismatch");
  if constexpr (std::is_same_v<S, float>) {
    const VectorD xd = x.template cast<double>();
    VectorD y = mu.template cast<double>() * xd;
    y.noalias() += (sigma * f.scale()) * (f.A.template cast<double>() *
                                          (f.B.template cast<double>().transpose() * xd));
    return y.cast<float>();
  } else {
    VecX<S> y = mu * x;
    y.noalias() +=
        static_cast<S>(sigma * f.scale()) * (f.A * (f.B.transpose() * x));
    return y;
  }
}

// (1/(N sqrt(r))) sum_i f_i A_i B_i^T as one stacked product; no E_i is ever
// materialized. Factor columns are stacked worker-index ascending, and the
// product runs single-threaded, so the result is bit-stable across thread
// counts. Accumulation is always 64-bit.
template <typename S>
MatX<S> aggregate_update(std::span<const LowRankFactors<S>> factors,
                         std::span<const double> shaped_fitness) {
  if (factors.empty()) throw std::invalid_argument("aggregate_update: empty population");
  if (factors.size() != shaped_fitness.size())
    throw std::invalid_argument("aggregate_update: fitness/population size mismatch");
  const auto n_members = static_cast<int>(factors.size());
  const int m = static_cast<int>(factors[0].A.rows());
  const int n = static_cast<int>(factors[0].B.rows());
  const int r = factors[0].rank;
  for (const auto& f : factors)
    if (f.A.rows() != m || f.B.rows() != n || f.rank != r)
      throw std::invalid_argument("aggregate_update: inconsistent factor shapes");

  MatrixD a_stack(m, static_cast<Eigen::Index>(n_members) * r);
  MatrixD b_stack(n, static_cast<Eigen::Index>(n_members) * r);
  const double norm = 1.0 / (static_cast<double>(n_members) * std::sqrt(double(r)));
  for (int i = 0; i < n_members; ++i) {
    a_stack.middleCols(static_cast<Eigen::Index>(i) * r, r) =
        (shaped_fitness[i] * norm) * factors[i].A.template cast<double>();
    b_stack.middleCols(static_cast<Eigen::Index>(i) * r, r) =
        factors[i].B.template cast<double>();
  }
  MatrixD g = a_stack * b_stack.transpose();
  if constexpr (std::is_same_v<S, float>)
    return g.cast<float>();
  else
    return g;
}

// Count of singular values above tol_rel * sigma_max.
int numerical_rank(const MatrixD& m, double tol_rel = 1e-8);

}  // namespace eggroll
