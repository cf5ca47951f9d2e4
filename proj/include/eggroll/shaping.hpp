// Fitness transforms applied before aggregation.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace eggroll {

enum class ShapingMode {
  Raw,            // fitness used as-is
  CenteredRank,   // ranks mapped to [-0.5, 0.5], tie-averaged
  AntitheticSign, // sign(s+ - s-) per antithetic pair
  GroupZScore,    // per-question z-score with global std, averaged
};

// Ranks mapped linearly onto [-0.5, 0.5]; ties get averaged ranks, so the
// output is permutation-equivariant and sums to zero.
std::vector<double> centered_rank(const std::vector<double>& f);

// sign(s_plus - s_minus) in {-1, 0, 1}.
int antithetic_sign(double s_plus, double s_minus);

// S is m questions x n members. Per member: mean over questions of
// (score - question mean) / global std, where the std is the population
// std over all m*n entries (replaced by eps when smaller than eps).
std::vector<double> group_z_score(const Eigen::MatrixXd& scores, double eps = 1e-8);

}  // namespace eggroll
