// The optimization loop: low-rank EGGROLL steps, the full-rank OpenES
// baseline, multiplicative schedules, and the Monte Carlo gradient
// estimator used to measure the low-rank approximation error.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eggroll/lowrank.hpp"
#include "eggroll/scorefn.hpp"
#include "eggroll/shaping.hpp"

namespace eggroll {

struct EsConfig {
  int pop_size = 512;  // even when antithetic
  int rank = 1;
  double sigma = 0.1;
  double alpha = 0.05;
  double lr_decay = 1.0;    // multiplicative per step
  double sigma_decay = 1.0; // multiplicative per step
  ShapingMode shaping = ShapingMode::CenteredRank;
  bool antithetic = true;
  int evals_per_member = 1;
  int reuse_factor = 1;  // members sharing one data stream
  std::uint64_t master_seed = 0;
  std::uint64_t t_max = 100;

  void validate() const;  // throws std::invalid_argument
  double sigma_at(std::uint64_t t) const;
  double alpha_at(std::uint64_t t) const;
};

// One population member's view of the parameters, with its perturbation
// applied. Fitness functions either materialize (small matrices) or push
// inputs through the decomposed forward path.
class PerturbedParams {
 public:
  static PerturbedParams unperturbed(const std::vector<MatrixF>& mu);
  static PerturbedParams low_rank(const std::vector<MatrixF>& mu,
                                  const std::vector<FactorsF>& factors, double sigma,
                                  double sign);
  static PerturbedParams dense(const std::vector<MatrixF>& mu,
                               const std::vector<MatrixF>& noise, double sigma,
                               double sign);

  std::size_t size() const { return mu_->size(); }
  // mu_i + sign * sigma * E_i, as a double matrix.
  MatrixD materialize(std::size_t i) const;
  // (mu_i + sign * sigma * E_i) x without forming E_i (low-rank members).
  VectorD forward(std::size_t i, const VectorD& x) const;

 private:
  const std::vector<MatrixF>* mu_ = nullptr;
  const std::vector<FactorsF>* factors_ = nullptr;
  const std::vector<MatrixF>* dense_ = nullptr;
  double sigma_ = 0.0;
  double sign_ = 1.0;
};

// Evaluation contract: perturbed parameter view plus the data stream key
// for this evaluation.
using FitnessFn = std::function<double(const PerturbedParams&, const StreamKey&)>;

struct StepLog {
  std::uint64_t t = 0;
  double mean_fitness = 0.0;
  double best_fitness = 0.0;
  double sigma_t = 0.0;
  double alpha_t = 0.0;
  int non_finite_replaced = 0;
  double wall_ms = 0.0;
};

// One EGGROLL update of every matrix in mu. Pure function of (mu, cfg, t):
// keys are derived from (master_seed, t, worker), so reruns and resumes are
// bit-identical. Non-finite fitnesses are replaced by the population
// minimum and counted in the log.
StepLog eggroll_step(std::vector<MatrixF>& mu, const EsConfig& cfg, std::uint64_t t,
                     const FitnessFn& fitness);

// Full-rank baseline: dense N(0,1) perturbation per member, O(mn) each.
StepLog openes_step(std::vector<MatrixF>& mu, const EsConfig& cfg, std::uint64_t t,
                    const FitnessFn& fitness);

enum class EsAlgo { Eggroll, OpenEs };

// Returning false aborts the run; the abort surfaces as EsAborted.
using StepCallback = std::function<bool(const StepLog&, const std::vector<MatrixF>&)>;

struct EsAborted {
  std::uint64_t t;
};

std::vector<StepLog> run(std::vector<MatrixF>& mu, const EsConfig& cfg, EsAlgo algo,
                         const FitnessFn& fitness, const StepCallback& callback = nullptr,
                         std::uint64_t start_t = 0);

// Monte Carlo estimate of -(1/sigma) E[S(Z) f(mu + sigma Z)] with rank-r
// Z = (1/sqrt(r)) A B^T (rank = 0 means dense full-rank Z with the Gaussian
// limit score). Sampling is antithetic, and factor draws are indexed so
// that rank r consumes a prefix of the rank r' > r draws: estimates across
// ranks share common random numbers. Analysis harness only.
MatrixD estimate_gradient(const MatrixD& mu, int rank, double sigma, int n_samples,
                          const ScoreModel& score,
                          const std::function<double(const MatrixD&)>& fitness,
                          std::uint64_t master_seed);

}  // namespace eggroll
