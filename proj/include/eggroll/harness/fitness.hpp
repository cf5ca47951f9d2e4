// Synthetic fitness suite. All are deterministic analytic functions of the
// materialized parameter matrices, maximized at M = M*.
#pragma once

#include <string>
#include <vector>

#include "eggroll/es_engine.hpp"

namespace eggroll::harness {

double fitness_sphere(const MatrixD& m, const MatrixD& target);
double fitness_rastrigin(const MatrixD& m, const MatrixD& target);
double fitness_bounded_gauss(const MatrixD& m, const MatrixD& target);  // in (0, 1]

// Sum of the per-matrix fitness over every matrix in the view. The data
// key is ignored; these objectives are noise-free.
FitnessFn make_fitness(const std::string& kind, std::vector<MatrixD> targets);

}  // namespace eggroll::harness
