#include "eggroll/harness/fitness.hpp"

#include <cmath>
#include <stdexcept>

namespace eggroll::harness {

double fitness_sphere(const MatrixD& m, const MatrixD& target) {
  return -(m - target).squaredNorm();
}

double fitness_rastrigin(const MatrixD& m, const MatrixD& target) {
  constexpr double kTwoPi = 6.28318530717958647692;
  double acc = 0.0;
  const MatrixD d = m - target;
  for (Eigen::Index c = 0; c < d.cols(); ++c)
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      const double x = d(r, c);
      acc += x * x - 10.0 * std::cos(kTwoPi * x) + 10.0;
    }
  return -acc;
}

double fitness_bounded_gauss(const MatrixD& m, const MatrixD& target) {
  return std::exp(-(m - target).squaredNorm());
}

FitnessFn make_fitness(const std::string& kind, std::vector<MatrixD> targets) {
  double (*fn)(const MatrixD&, const MatrixD&) = nullptr;
  if (kind == "sphere")
    fn = fitness_sphere;
  else if (kind == "rastrigin")
    fn = fitness_rastrigin;
  else if (kind == "bounded_gauss")
    fn = fitness_bounded_gauss;
  else
    throw std::invalid_argument("unknown fitness kind: " + kind);
  return [fn, targets = std::move(targets)](const PerturbedParams& view,
                                            const StreamKey&) {
    double acc = 0.0;
    for (std::size_t i = 0; i < view.size(); ++i)
      acc += fn(view.materialize(i), targets[i]);
    return acc;
  };
}

}  // namespace eggroll::harness
