#include "eggroll/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eggroll {

std::vector<double> centered_rank(const std::vector<double>& f) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n <= 1) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  // Average ranks over tie runs.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && f[order[j + 1]] == f[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k)
      out[order[k]] = avg / static_cast<double>(n - 1) - 0.5;
    i = j + 1;
  }
  return out;
}

int antithetic_sign(double s_plus, double s_minus) {
  if (s_plus > s_minus) return 1;
  if (s_plus < s_minus) return -1;
  return 0;
}

std::vector<double> group_z_score(const Eigen::MatrixXd& scores, double eps) {
  const Eigen::Index m = scores.rows();
  const Eigen::Index n = scores.cols();
  // Two-pass population variance over all entries.
  const double mean = scores.mean();
  double var = 0.0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    const double d = scores.data()[j] - mean;
    var += d * d;
  }
  var /= static_cast<double>(m * n);
  double sd = std::sqrt(var);
  if (sd < eps) sd = eps;
  const Eigen::VectorXd row_mean = scores.rowwise().mean();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index q = 0; q < m; ++q) acc += (scores(q, j) - row_mean(q)) / sd;
    out[static_cast<std::size_t>(j)] = acc / static_cast<double>(m);
  }
  return out;
}

}  // namespace eggroll
