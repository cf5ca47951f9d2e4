#include "eggroll/es_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eggroll/parallel.hpp"

namespace eggroll {

void EsConfig::validate() const {
  if (pop_size < 1) throw std::invalid_argument("EsConfig: pop_size must be >= 1");
  if (antithetic && pop_size % 2 != 0)
    throw std::invalid_argument("EsConfig: antithetic requires even pop_size");
  if (shaping == ShapingMode::AntitheticSign && !antithetic)
    throw std::invalid_argument("EsConfig: sign shaping requires antithetic pairs");
  if (rank < 1) throw std::invalid_argument("EsConfig: rank must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("EsConfig: sigma must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("EsConfig: alpha must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0) || !(sigma_decay > 0.0 && sigma_decay <= 1.0))
    throw std::invalid_argument("EsConfig: decays must lie in (0, 1]");
  if (evals_per_member < 1)
    throw std::invalid_argument("EsConfig: evals_per_member must be >= 1");
  if (reuse_factor < 1) throw std::invalid_argument("EsConfig: reuse_factor must be >= 1");
}

double EsConfig::sigma_at(std::uint64_t t) const {
  return sigma * std::pow(sigma_decay, static_cast<double>(t));
}

double EsConfig::alpha_at(std::uint64_t t) const {
  return alpha * std::pow(lr_decay, static_cast<double>(t));
}

PerturbedParams PerturbedParams::unperturbed(const std::vector<MatrixF>& mu) {
  PerturbedParams v;
  v.mu_ = &mu;
  return v;
}

PerturbedParams PerturbedParams::low_rank(const std::vector<MatrixF>& mu,
                                          const std::vector<FactorsF>& factors,
                                          double sigma, double sign) {
  PerturbedParams v;
  v.mu_ = &mu;
  v.factors_ = &factors;
  v.sigma_ = sigma;
  v.sign_ = sign;
  return v;
}

PerturbedParams PerturbedParams::dense(const std::vector<MatrixF>& mu,
                                       const std::vector<MatrixF>& noise, double sigma,
                                       double sign) {
  PerturbedParams v;
  v.mu_ = &mu;
  v.dense_ = &noise;
  v.sigma_ = sigma;
  v.sign_ = sign;
  return v;
}

MatrixD PerturbedParams::materialize(std::size_t i) const {
  MatrixD m = (*mu_)[i].cast<double>();
  if (factors_) {
    const auto& f = (*factors_)[i];
    m.noalias() += (sign_ * sigma_ * f.scale()) *
                   (f.A.cast<double>() * f.B.cast<double>().transpose());
  } else if (dense_) {
    m.noalias() += (sign_ * sigma_) * (*dense_)[i].cast<double>();
  }
  return m;
}

VectorD PerturbedParams::forward(std::size_t i, const VectorD& x) const {
  const MatrixD mu_d = (*mu_)[i].cast<double>();
  if (factors_) {
    const auto& f = (*factors_)[i];
    VectorD y = mu_d * x;
    y.noalias() += (sign_ * sigma_ * f.scale()) *
                   (f.A.cast<double>() * (f.B.cast<double>().transpose() * x));
    return y;
  }
  if (dense_) return mu_d * x + (sign_ * sigma_) * ((*dense_)[i].cast<double>() * x);
  return mu_d * x;
}

namespace {

MatrixF dense_noise(const StreamKey& key, Eigen::Index rows, Eigen::Index cols) {
  const auto draws =
      fill_gaussian(key, static_cast<std::size_t>(rows) * cols, 1.0);
  MatrixF e(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      e(r, c) = static_cast<float>(draws[static_cast<std::size_t>(c) * rows + r]);
  return e;
}

// Replace non-finite fitnesses with the finite minimum so a failed
// evaluation never dominates the update. Returns the replacement count.
int sanitize_fitness(std::vector<double>& f) {
  double finite_min = std::numeric_limits<double>::infinity();
  for (double v : f)
    if (std::isfinite(v)) finite_min = std::min(finite_min, v);
  if (!std::isfinite(finite_min)) finite_min = 0.0;
  int replaced = 0;
  for (double& v : f)
    if (!std::isfinite(v)) {
      v = finite_min;
      ++replaced;
    }
  return replaced;
}

std::vector<double> shape_fitness(const EsConfig& cfg, const std::vector<double>& f,
                                  const Eigen::MatrixXd* eval_scores) {
  switch (cfg.shaping) {
    case ShapingMode::Raw:
      return f;
    case ShapingMode::CenteredRank:
      return centered_rank(f);
    case ShapingMode::AntitheticSign: {
      std::vector<double> shaped(f.size());
      for (std::size_t w = 0; w + 1 < f.size(); w += 2) {
        const int s = antithetic_sign(f[w], f[w + 1]);
        shaped[w] = s;
        shaped[w + 1] = -s;
      }
      return shaped;
    }
    case ShapingMode::GroupZScore:
      return group_z_score(*eval_scores);
  }
  throw std::logic_error("unknown shaping mode");
}

struct EvalResult {
  std::vector<double> fitness;       // per member, averaged over evals
  Eigen::MatrixXd eval_scores;       // evals x members (z-score shaping only)
  int non_finite = 0;
};

// Evaluate all members. make_view(pair, sign) yields the member's parameter
// view; data keys are shared within reuse groups (and across the whole
// population for z-score shaping, where evaluations play the role of
// questions).
EvalResult evaluate_population(
    const EsConfig& cfg, std::uint64_t t, const FitnessFn& fitness,
    const std::function<PerturbedParams(int pair, double sign)>& make_view) {
  const int n = cfg.pop_size;
  const int members_per_pair = cfg.antithetic ? 2 : 1;
  const int pairs = n / members_per_pair;
  const bool zscore = cfg.shaping == ShapingMode::GroupZScore;
  const int evals = cfg.evals_per_member;
  const int group_size =
      cfg.antithetic ? std::max(cfg.reuse_factor, 2) : cfg.reuse_factor;

  EvalResult res;
  res.fitness.assign(static_cast<std::size_t>(n), 0.0);
  if (zscore) res.eval_scores.resize(evals, n);

  parallel_for(pairs, [&](int w) {
    for (int k = 0; k < members_per_pair; ++k) {
      const int i = w * members_per_pair + k;
      const double sign = (k == 1) ? -1.0 : 1.0;
      const PerturbedParams view = make_view(w, sign);
      const std::uint32_t data_group =
          zscore ? 0u : static_cast<std::uint32_t>(i / group_size);
      double acc = 0.0;
      for (int e = 0; e < evals; ++e) {
        const StreamKey dk = derive_stream(cfg.master_seed, t, data_group,
                                           static_cast<std::uint32_t>(e),
                                           StreamTag::Data);
        const double v = fitness(view, dk);
        if (zscore) res.eval_scores(e, i) = v;
        acc += v;
      }
      res.fitness[static_cast<std::size_t>(i)] = acc / evals;
    }
  });

  res.non_finite = sanitize_fitness(res.fitness);
  if (zscore) {
    double finite_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < res.eval_scores.size(); ++j)
      if (std::isfinite(res.eval_scores.data()[j]))
        finite_min = std::min(finite_min, res.eval_scores.data()[j]);
    if (!std::isfinite(finite_min)) finite_min = 0.0;
    for (Eigen::Index j = 0; j < res.eval_scores.size(); ++j)
      if (!std::isfinite(res.eval_scores.data()[j]))
        res.eval_scores.data()[j] = finite_min;
  }
  return res;
}

StepLog make_log(const EsConfig& cfg, std::uint64_t t, const EvalResult& res,
                 std::chrono::steady_clock::time_point start) {
  StepLog log;
  log.t = t;
  log.sigma_t = cfg.sigma_at(t);
  log.alpha_t = cfg.alpha_at(t);
  log.non_finite_replaced = res.non_finite;
  double sum = 0.0, best = -std::numeric_limits<double>::infinity();
  for (double v : res.fitness) {
    sum += v;
    best = std::max(best, v);
  }
  log.mean_fitness = sum / static_cast<double>(res.fitness.size());
  log.best_fitness = best;
  log.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return log;
}

void apply_update(std::vector<MatrixF>& mu, const std::vector<MatrixD>& g, double alpha_t) {
  for (std::size_t l = 0; l < mu.size(); ++l)
    mu[l] = (mu[l].cast<double>() + alpha_t * g[l]).cast<float>();
}

}  // namespace

StepLog eggroll_step(std::vector<MatrixF>& mu, const EsConfig& cfg, std::uint64_t t,
                     const FitnessFn& fitness) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const int members_per_pair = cfg.antithetic ? 2 : 1;
  const int pairs = cfg.pop_size / members_per_pair;
  const std::size_t n_mats = mu.size();
  const double sigma_t = cfg.sigma_at(t);

  // Factors are sampled per pair; the odd member reuses the same keys with
  // the perturbation negated, which pairs +E and -E exactly.
  std::vector<std::vector<FactorsF>> factors(static_cast<std::size_t>(pairs));
  parallel_for(pairs, [&](int w) {
    auto& per_matrix = factors[static_cast<std::size_t>(w)];
    per_matrix.reserve(n_mats);
    for (std::size_t l = 0; l < n_mats; ++l) {
      const auto ka = derive_stream(cfg.master_seed, t, static_cast<std::uint32_t>(w),
                                    static_cast<std::uint32_t>(l), StreamTag::FactorA);
      const auto kb = derive_stream(cfg.master_seed, t, static_cast<std::uint32_t>(w),
                                    static_cast<std::uint32_t>(l), StreamTag::FactorB);
      per_matrix.push_back(sample_factors<float>(
          ka, kb, static_cast<int>(mu[l].rows()), static_cast<int>(mu[l].cols()),
          cfg.rank, FactorDist::gaussian(1.0)));
    }
  });

  const EvalResult res = evaluate_population(
      cfg, t, fitness, [&](int w, double sign) {
        return PerturbedParams::low_rank(mu, factors[static_cast<std::size_t>(w)],
                                         sigma_t, sign);
      });
  const std::vector<double> shaped = shape_fitness(cfg, res.fitness, &res.eval_scores);

  // Antithetic pairs collapse to one factor set with weight
  // (F+ - F-) / 2, which equals the member-level sum exactly.
  std::vector<double> pair_weight(static_cast<std::size_t>(pairs));
  for (int w = 0; w < pairs; ++w)
    pair_weight[static_cast<std::size_t>(w)] =
        cfg.antithetic ? 0.5 * (shaped[2 * w] - shaped[2 * w + 1]) : shaped[w];

  std::vector<MatrixD> update(n_mats);
  std::vector<FactorsF> column(static_cast<std::size_t>(pairs));
  for (std::size_t l = 0; l < n_mats; ++l) {
    for (int w = 0; w < pairs; ++w)
      column[static_cast<std::size_t>(w)] = factors[static_cast<std::size_t>(w)][l];
    const MatrixF g = aggregate_update<float>(column, pair_weight);
    update[l] = g.cast<double>();
  }
  apply_update(mu, update, cfg.alpha_at(t));
  return make_log(cfg, t, res, start);
}

StepLog openes_step(std::vector<MatrixF>& mu, const EsConfig& cfg, std::uint64_t t,
                    const FitnessFn& fitness) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const int members_per_pair = cfg.antithetic ? 2 : 1;
  const int pairs = cfg.pop_size / members_per_pair;
  const std::size_t n_mats = mu.size();
  const double sigma_t = cfg.sigma_at(t);

  std::vector<std::vector<MatrixF>> noise(static_cast<std::size_t>(pairs));
  parallel_for(pairs, [&](int w) {
    auto& per_matrix = noise[static_cast<std::size_t>(w)];
    per_matrix.reserve(n_mats);
    for (std::size_t l = 0; l < n_mats; ++l) {
      const auto key = derive_stream(cfg.master_seed, t, static_cast<std::uint32_t>(w),
                                     static_cast<std::uint32_t>(l), StreamTag::FactorA);
      per_matrix.push_back(dense_noise(key, mu[l].rows(), mu[l].cols()));
    }
  });

  const EvalResult res = evaluate_population(
      cfg, t, fitness, [&](int w, double sign) {
        return PerturbedParams::dense(mu, noise[static_cast<std::size_t>(w)], sigma_t,
                                      sign);
      });
  const std::vector<double> shaped = shape_fitness(cfg, res.fitness, &res.eval_scores);

  std::vector<MatrixD> update(n_mats);
  for (std::size_t l = 0; l < n_mats; ++l) {
    MatrixD g = MatrixD::Zero(mu[l].rows(), mu[l].cols());
    for (int w = 0; w < pairs; ++w) {
      const double weight =
          cfg.antithetic ? shaped[2 * w] - shaped[2 * w + 1] : shaped[w];
      if (weight != 0.0)
        g.noalias() += weight * noise[static_cast<std::size_t>(w)][l].cast<double>();
    }
    update[l] = g / static_cast<double>(cfg.pop_size);
  }
  apply_update(mu, update, cfg.alpha_at(t));
  return make_log(cfg, t, res, start);
}

std::vector<StepLog> run(std::vector<MatrixF>& mu, const EsConfig& cfg, EsAlgo algo,
                         const FitnessFn& fitness, const StepCallback& callback,
                         std::uint64_t start_t) {
  cfg.validate();
  std::vector<StepLog> logs;
  logs.reserve(static_cast<std::size_t>(cfg.t_max - start_t));
  for (std::uint64_t t = start_t; t < cfg.t_max; ++t) {
    const StepLog log = algo == EsAlgo::Eggroll ? eggroll_step(mu, cfg, t, fitness)
                                                : openes_step(mu, cfg, t, fitness);
    logs.push_back(log);
    if (callback && !callback(log, mu)) throw EsAborted{t};
  }
  return logs;
}

MatrixD estimate_gradient(const MatrixD& mu, int rank, double sigma, int n_samples,
                          const ScoreModel& score,
                          const std::function<double(const MatrixD&)>& fitness,
                          std::uint64_t master_seed) {
  if (n_samples < 1) throw std::invalid_argument("estimate_gradient: n_samples >= 1");
  const int m = static_cast<int>(mu.rows());
  const int n = static_cast<int>(mu.cols());
  const int pairs = std::max(1, n_samples / 2);

  // Fixed-size chunks with a sequential final reduce keep the result
  // byte-identical for any thread count.
  constexpr int kChunk = 512;
  const int n_chunks = (pairs + kChunk - 1) / kChunk;
  std::vector<MatrixD> partial(static_cast<std::size_t>(n_chunks),
                               MatrixD::Zero(m, n));

  parallel_for(n_chunks, [&](int c) {
    MatrixD acc = MatrixD::Zero(m, n);
    const int w_end = std::min(pairs, (c + 1) * kChunk);
    for (int w = c * kChunk; w < w_end; ++w) {
      MatrixD z(m, n);
      if (rank >= 1) {
        const auto ka = derive_stream(master_seed, 0, static_cast<std::uint32_t>(w), 0,
                                      StreamTag::FactorA);
        const auto kb = derive_stream(master_seed, 0, static_cast<std::uint32_t>(w), 0,
                                      StreamTag::FactorB);
        const auto f = sample_factors<double>(ka, kb, m, n, rank,
                                              FactorDist::gaussian(1.0));
        z.noalias() = f.scale() * (f.A * f.B.transpose());
      } else {
        const auto key = derive_stream(master_seed, 0, static_cast<std::uint32_t>(w), 0,
                                       StreamTag::FactorA);
        const auto draws =
            fill_gaussian(key, static_cast<std::size_t>(m) * n, 1.0);
        for (int col = 0; col < n; ++col)
          for (int row = 0; row < m; ++row)
            z(row, col) = draws[static_cast<std::size_t>(col) * m + row];
      }
      for (const double sign : {1.0, -1.0}) {
        const MatrixD zs = sign * z;
        acc.noalias() -= apply_score(zs, score) * fitness(mu + sigma * zs);
      }
    }
    partial[static_cast<std::size_t>(c)] = acc;
  });

  MatrixD total = MatrixD::Zero(m, n);
  for (const auto& p : partial) total += p;
  return total / (sigma * 2.0 * pairs);
}

}  // namespace eggroll
