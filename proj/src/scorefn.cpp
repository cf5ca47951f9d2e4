#include "eggroll/scorefn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eggroll {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_half_integer(double nu) {
  const double two = 2.0 * nu;
  return std::abs(two - std::nearbyint(two)) < 1e-12 &&
         std::abs(nu - std::nearbyint(nu)) > 0.25;
}

bool is_integer(double nu) { return std::abs(nu - std::nearbyint(nu)) < 1e-12; }

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Scaled integrand for K_nu: exp(-z (cosh t - 1)) cosh(nu t). The true
// kernel carries an extra exp(-z) factor applied by the caller.
double bessel_quadrature_scaled(double nu, double z) {
  // Peak of nu*t - z(cosh t - 1) sits at t* = asinh(nu / z).
  const double t_star = nu > 0.0 ? std::asinh(nu / z) : 0.0;
  const double log_peak = nu * t_star - z * (std::cosh(t_star) - 1.0);
  auto log_integrand = [&](double t) { return nu * t - z * (std::cosh(t) - 1.0); };
  double t_end = t_star + 1.0;
  while (log_integrand(t_end) > log_peak - 50.0 && t_end < 800.0) t_end += 1.0;

  const double scale = std::exp(-log_peak);  // keep the integrand O(1)
  auto f = [&](double t) {
    const double le = -z * (std::cosh(t) - 1.0);
    // cosh(nu t) = (e^{nu t} + e^{-nu t}) / 2, assembled in log space.
    return 0.5 * scale * (std::exp(nu * t + le) + std::exp(-nu * t + le));
  };
  const double fa = f(0.0);
  const double fm = f(0.5 * t_end);
  const double fb = f(t_end);
  const double whole = t_end / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(1e-15, 1e-13 * std::abs(whole));
  const double integral =
      simpson_rec(f, 0.0, t_end, fa, fm, fb, whole, tol, 40);
  return integral / scale;
}

// K_{nu+1}/K_nu for half-integer nu via the ratio recurrence
// rho_nu = 2 nu / z + 1 / rho_{nu-1}, rho_{1/2} = 1 + 1/z.
double half_integer_ratio(double nu_target, double z) {
  double rho = 1.0 + 1.0 / z;  // K_{3/2} / K_{1/2}
  for (double nu = 1.5; nu <= nu_target + 0.25; nu += 1.0)
    rho = 2.0 * nu / z + 1.0 / rho;
  return rho;
}

double half_integer_k_scaled(double nu, double z) {
  const double k_half = std::sqrt(kPi / (2.0 * z));  // e^z K_{1/2}
  if (nu < 1.0) return k_half;
  double prev = k_half;
  double cur = k_half * (1.0 + 1.0 / z);  // e^z K_{3/2}
  for (double v = 1.5; v <= nu - 0.5 + 0.25; v += 1.0) {
    const double next = prev + (2.0 * v / z) * cur;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol) {
  const double fa = f(a);
  const double fm = f(0.5 * (a + b));
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 44);
}

double bessel_k_scaled(double nu, double z) {
  if (!(z > 0.0)) throw std::domain_error("bessel_k: z must be > 0");
  if (nu < 0.0) nu = -nu;  // K_{-nu} = K_nu
  if (is_half_integer(nu)) return half_integer_k_scaled(nu, z);
  if (!is_integer(nu))
    throw std::invalid_argument("bessel_k: order must be a multiple of 1/2");
  return bessel_quadrature_scaled(nu, z);
}

double bessel_k(double nu, double z) { return std::exp(-z) * bessel_k_scaled(nu, z); }

double bessel_k_ratio(double nu, double z) {
  if (!(z > 0.0)) throw std::domain_error("bessel_k_ratio: z must be > 0");
  if (is_half_integer(nu)) return half_integer_ratio(nu, z);
  return bessel_quadrature_scaled(nu + 1.0, z) / bessel_quadrature_scaled(nu, z);
}

ScoreModel ScoreModel::gaussian_limit(double sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("ScoreModel: sigma0 must be > 0");
  ScoreModel m;
  m.kind = Kind::GaussianLimit;
  m.sigma0 = sigma0;
  return m;
}

ScoreModel ScoreModel::mean_field_r1_ggd(double s, double p) {
  if (!(s > 0.0) || !(p > 0.0))
    throw std::invalid_argument("ScoreModel: s and p must be > 0");
  ScoreModel m;
  m.kind = Kind::MeanFieldR1Ggd;
  m.s = s;
  m.p = p;
  return m;
}

ScoreModel ScoreModel::mean_field_gauss(double s, int r) {
  if (!(s > 0.0) || r < 1)
    throw std::invalid_argument("ScoreModel: s must be > 0 and r >= 1");
  ScoreModel m;
  m.kind = Kind::MeanFieldGauss;
  m.s = s;
  m.r = r;
  return m;
}

double mf_density_r1_ggd(double z, double s, double p) {
  if (!(s > 0.0) || !(p > 0.0))
    throw std::invalid_argument("mf_density_r1_ggd: s and p must be > 0");
  if (z == 0.0) return std::numeric_limits<double>::infinity();
  const double t = 2.0 * std::pow(std::abs(z), 0.5 * p) / std::pow(s, p);
  const double g = std::tgamma(1.0 / p);
  return p / (s * g * s * g) * bessel_k(0.0, t);
}

double mf_score_r1_ggd(double z, double s, double p) {
  if (!(s > 0.0) || !(p > 0.0))
    throw std::invalid_argument("mf_score_r1_ggd: s and p must be > 0");
  const double sign = std::signbit(z) ? -1.0 : 1.0;
  const double az = std::max(std::abs(z), kScoreZClamp);
  const double sp = std::pow(s, p);
  const double t = 2.0 * std::pow(az, 0.5 * p) / sp;
  const double ratio = bessel_k_ratio(0.0, t);  // K_1 / K_0
  return -ratio * p * std::pow(az, 0.5 * p - 1.0) * sign / sp;
}

double mf_density_gauss(double z, double s, int r) {
  if (!(s > 0.0) || r < 1)
    throw std::invalid_argument("mf_density_gauss: s must be > 0 and r >= 1");
  const double sr = std::sqrt(static_cast<double>(r));
  const double nu = 0.5 * (r - 1);
  if (z == 0.0) {
    if (r == 1) return std::numeric_limits<double>::infinity();
    return sr * std::tgamma(nu) / (s * s * std::sqrt(kPi) * std::tgamma(0.5 * r));
  }
  const double az = std::abs(z);
  const double x = 2.0 * sr * az / (s * s);
  // Deep in the K_nu power-law regime the formula is the z = 0 limit to
  // ~1e-8 relative; taking it directly avoids overflowing the two huge
  // cancelling factors.
  if (r >= 3 && x < 1e-4)
    return sr * std::tgamma(nu) / (s * s * std::sqrt(kPi) * std::tgamma(0.5 * r));
  const double prefix = 2.0 * sr * std::pow(sr * az, nu) /
                        (std::pow(s, r + 1) * std::sqrt(kPi) * std::tgamma(0.5 * r));
  return prefix * bessel_k(nu, x);
}

double mf_score_gauss(double z, double s, int r) {
  if (!(s > 0.0) || r < 1)
    throw std::invalid_argument("mf_score_gauss: s must be > 0 and r >= 1");
  const double sign = std::signbit(z) ? -1.0 : 1.0;
  const double az = std::max(std::abs(z), kScoreZClamp);
  const double zc = sign * az;
  const double sr = std::sqrt(static_cast<double>(r));
  const double x = 2.0 * sr * az / (s * s);
  const double ratio = bessel_k_ratio(0.5 * (r - 1), x);
  return (r - 1) / zc - (2.0 * sr * sign / (s * s)) * ratio;
}

Eigen::MatrixXd gaussian_score(const Eigen::MatrixXd& z, double sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("gaussian_score: sigma0 must be > 0");
  const double s4 = sigma0 * sigma0 * sigma0 * sigma0;
  return -z / s4;
}

Eigen::MatrixXd apply_score(const Eigen::MatrixXd& z, const ScoreModel& model) {
  switch (model.kind) {
    case ScoreModel::Kind::GaussianLimit:
      return gaussian_score(z, model.sigma0);
    case ScoreModel::Kind::MeanFieldR1Ggd: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          out(i, j) = mf_score_r1_ggd(z(i, j), model.s, model.p);
      return out;
    }
    case ScoreModel::Kind::MeanFieldGauss: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < z.cols(); ++j)
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          out(i, j) = mf_score_gauss(z(i, j), model.s, model.r);
      return out;
    }
  }
  throw std::logic_error("apply_score: unknown variant");
}

}  // namespace eggroll
