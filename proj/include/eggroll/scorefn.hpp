// Score-function approximators for low-rank perturbations: the Gaussian
// limit -Z/sigma0^4 plus the mean-field family built from analytic marginal
// densities of a single perturbation entry (modified Bessel functions of
// the second kind).
#pragma once

#include <Eigen/Dense>
#include <functional>

namespace eggroll {

// Both mean-field scores are singular at z = 0 (measure-zero for continuous
// perturbations); evaluation clamps |z| to this value, preserving sign.
inline constexpr double kScoreZClamp = 1e-8;

struct ScoreModel {
  enum class Kind { GaussianLimit, MeanFieldR1Ggd, MeanFieldGauss };
  Kind kind = Kind::GaussianLimit;
  double sigma0 = 1.0;
  double s = 1.0;
  double p = 2.0;
  int r = 1;

  static ScoreModel gaussian_limit(double sigma0);
  static ScoreModel mean_field_r1_ggd(double s, double p);
  static ScoreModel mean_field_gauss(double s, int r);
};

// Modified Bessel function of the second kind, K_nu(z), for nu >= 0 a
// multiple of 1/2 and z > 0. Half-integer orders use the closed form
// K_{1/2}(z) = sqrt(pi/(2z)) e^-z and the upward recurrence
// K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu (stable there since K grows with
// nu); integer orders integrate exp(-z cosh t) cosh(nu t) adaptively.
double bessel_k(double nu, double z);

// exp(z) * K_nu(z); avoids underflow for large z.
double bessel_k_scaled(double nu, double z);

// K_{nu+1}(z) / K_nu(z), computed without forming huge values.
double bessel_k_ratio(double nu, double z);

// Marginal density of the product of two GG(s, p) variables:
// p(z) = p / (s Gamma(1/p))^2 * K_0(2 |z|^{p/2} / s^p). Diverges
// logarithmically at z = 0 (+inf is returned there).
double mf_density_r1_ggd(double z, double s, double p);

// d/dz log of the above; odd in z, clamped near 0.
double mf_score_r1_ggd(double z, double s, double p);

// Marginal density of one entry of (1/sqrt(r)) A B^T with Gaussian entries
// of std s/sqrt(2) each (GG(s,2)). r = 1 reduces to the GGD product density
// with p = 2; z = 0 is +inf for r = 1 and the finite small-argument limit
// for r >= 2.
double mf_density_gauss(double z, double s, int r);

// Score of the rank-r Gaussian marginal:
// (r-1)/z - (2 sqrt(r) sign(z) / s^2) K_{(r+1)/2}(x) / K_{(r-1)/2}(x)
// with x = 2 sqrt(r) |z| / s^2. Odd in z, clamped near 0.
double mf_score_gauss(double z, double s, int r);

// Gaussian-limit score -Z / sigma0^4, elementwise.
Eigen::MatrixXd gaussian_score(const Eigen::MatrixXd& z, double sigma0);

// Elementwise application of the selected variant.
Eigen::MatrixXd apply_score(const Eigen::MatrixXd& z, const ScoreModel& model);

// Adaptive Simpson quadrature to roughly abs_tol + rel_tol * |I|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-11);

}  // namespace eggroll
