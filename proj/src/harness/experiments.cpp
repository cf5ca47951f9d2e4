#include "eggroll/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "eggroll/es_engine.hpp"
#include "eggroll/harness/checkpoint.hpp"
#include "eggroll/harness/corpus.hpp"
#include "eggroll/harness/csv.hpp"
#include "eggroll/harness/fitness.hpp"
#include "eggroll/int_es.hpp"
#include "eggroll/scorefn.hpp"

namespace eggroll::harness {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoll(item));
  }
  if (out.empty()) throw std::runtime_error("empty integer list: '" + text + "'");
  return out;
}

ShapingMode parse_shaping(const std::string& name) {
  if (name == "raw") return ShapingMode::Raw;
  if (name == "rank") return ShapingMode::CenteredRank;
  if (name == "sign") return ShapingMode::AntitheticSign;
  if (name == "zscore") return ShapingMode::GroupZScore;
  throw std::runtime_error("unknown shaping mode: '" + name +
                           "' (expected raw|rank|sign|zscore)");
}

double bits_per_byte(std::int64_t loss_q16_sum, std::int64_t tokens) {
  return -static_cast<double>(loss_q16_sum) /
         (16.0 * static_cast<double>(std::max<std::int64_t>(tokens, 1)));
}

}  // namespace

RankDecayResult run_rank_decay(const Config& cfg, const std::string& out_csv) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 7));
  const int dim = static_cast<int>(cfg.get_int("dim", 4));
  const int samples = static_cast<int>(cfg.get_int("samples", 200000));
  const int ref_samples = static_cast<int>(cfg.get_int("ref_samples", 16 * samples));
  const double sigma = cfg.get_double("sigma", 0.8);
  const double curvature = cfg.get_double("curvature", 1.0);
  std::vector<std::int64_t> ranks = {1, 2, 4, 8, 16, 32};
  if (cfg.has("ranks")) ranks = parse_int_list(cfg.get_str("ranks", ""));
  else (void)cfg.get_str("ranks", "");
  cfg.reject_unknown();

  // Bounded, smooth, and sharply curved: the fourth-derivative scale is
  // what the low-rank bias couples to.
  const auto fitness = [curvature](const MatrixD& m) {
    return std::exp(-curvature * m.squaredNorm());
  };
  MatrixD mu(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) mu(r, c) = ((r + c) % 2 == 0 ? 0.4 : -0.4);

  const auto score = ScoreModel::gaussian_limit(1.0);
  const MatrixD reference =
      estimate_gradient(mu, 0, sigma, ref_samples, score, fitness, seed);

  RankDecayResult result;
  CsvWriter csv(out_csv, {"r", "frobenius_error"});
  for (const auto r : ranks) {
    const MatrixD g = estimate_gradient(mu, static_cast<int>(r), sigma, samples, score,
                                        fitness, seed);
    const double err = (g - reference).norm();
    result.ranks.push_back(static_cast<int>(r));
    result.errors.push_back(err);
    csv.row({fmt_int(r), fmt_double(err)});
  }

  // least-squares slope of log(err) against log(r)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(result.ranks.size());
  for (std::size_t i = 0; i < result.ranks.size(); ++i) {
    const double x = std::log(static_cast<double>(result.ranks[i]));
    const double y = std::log(result.errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  result.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  csv.comment("fitted_loglog_slope=" + fmt_double(result.slope));
  return result;
}

ScorePlotResult run_score_plot(const Config& cfg, const std::string& out_csv) {
  const double s = cfg.get_double("scale", std::sqrt(2.0));
  const double z_max = cfg.get_double("z_max", 4.0);
  const double step = cfg.get_double("z_step", 0.01);
  std::vector<std::int64_t> ranks = {1, 5, 10, 50};
  if (cfg.has("ranks")) ranks = parse_int_list(cfg.get_str("ranks", ""));
  else (void)cfg.get_str("ranks", "");
  cfg.reject_unknown();

  ScorePlotResult result;
  CsvWriter csv(out_csv, {"r", "z", "density", "z_density", "gaussian_limit"});
  const int half = static_cast<int>(std::llround(z_max / step));
  for (const auto r : ranks) {
    double sup = 0.0;
    for (int k = -half; k <= half; ++k) {
      const double z = k * step;
      const double dens = mf_density_gauss(z, s, static_cast<int>(r));
      const double zd = z == 0.0 ? 0.0 : z * dens;
      const double limit = z * normal_pdf(z);
      sup = std::max(sup, std::abs(zd - limit));
      csv.row({fmt_int(r), fmt_double(z), fmt_double(dens), fmt_double(zd),
               fmt_double(limit)});
    }
    result.ranks.push_back(static_cast<int>(r));
    result.sup_dist.push_back(sup);
    csv.comment("sup_dist r=" + std::to_string(r) + " " + fmt_double(sup));
  }
  return result;
}

std::vector<RankLawCase> run_rank_law(const Config& cfg, const std::string& out_csv) {
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 11));
  cfg.reject_unknown();
  struct Spec {
    int pop, rank, m, n;
  };
  const Spec specs[] = {{3, 2, 16, 16}, {20, 1, 8, 32}, {2, 1, 4, 4}, {6, 2, 32, 8}};

  std::vector<RankLawCase> cases;
  CsvWriter csv(out_csv, {"pop", "rank", "m", "n", "expected_rank", "numerical_rank"});
  for (const auto& sp : specs) {
    std::vector<FactorsD> factors;
    std::vector<double> fit;
    U64Stream fstream(derive_stream(seed, 1, 0, 0, StreamTag::Data));
    for (int w = 0; w < sp.pop; ++w) {
      const auto ka = derive_stream(seed, 0, static_cast<std::uint32_t>(w), 0,
                                    StreamTag::FactorA);
      const auto kb = derive_stream(seed, 0, static_cast<std::uint32_t>(w), 0,
                                    StreamTag::FactorB);
      factors.push_back(
          sample_factors<double>(ka, kb, sp.m, sp.n, sp.rank, FactorDist::gaussian(1.0)));
      fit.push_back(normal_icdf(u64_to_unit(fstream.next())));
    }
    const MatrixD update = aggregate_update<double>(factors, fit);
    RankLawCase c;
    c.pop = sp.pop;
    c.rank = sp.rank;
    c.m = sp.m;
    c.n = sp.n;
    c.expected = std::min({sp.pop * sp.rank, sp.m, sp.n});
    c.measured = numerical_rank(update);
    cases.push_back(c);
    csv.row({fmt_int(c.pop), fmt_int(c.rank), fmt_int(c.m), fmt_int(c.n),
             fmt_int(c.expected), fmt_int(c.measured)});
  }
  return cases;
}

EsBenchResult run_es_bench(const Config& cfg, const std::string& out_csv,
                           const std::string& checkpoint_out, bool timings) {
  EsConfig es;
  es.pop_size = static_cast<int>(cfg.get_int("pop_size", 512));
  es.rank = static_cast<int>(cfg.get_int("rank", 1));
  es.sigma = cfg.get_double("sigma", 0.1);
  es.alpha = cfg.get_double("alpha", 0.05);
  es.lr_decay = cfg.get_double("lr_decay", 1.0);
  es.sigma_decay = cfg.get_double("sigma_decay", 1.0);
  es.shaping = parse_shaping(cfg.get_str("shaping", "rank"));
  es.antithetic = cfg.get_bool("antithetic", true);
  es.evals_per_member = static_cast<int>(cfg.get_int("evals_per_member", 1));
  es.reuse_factor = static_cast<int>(cfg.get_int("reuse_factor", 1));
  es.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 17));
  es.t_max = static_cast<std::uint64_t>(cfg.get_int("steps", 200));
  const int m = static_cast<int>(cfg.get_int("rows", 2));
  const int n = static_cast<int>(cfg.get_int("cols", 2));
  const double target_value = cfg.get_double("target_value", 1.0);
  const std::string fitness_kind = cfg.get_str("fitness", "sphere");
  const std::string algo_name = cfg.get_str("algo", "eggroll");
  const EsAlgo algo = algo_name == "openes" ? EsAlgo::OpenEs : EsAlgo::Eggroll;
  if (algo_name != "openes" && algo_name != "eggroll")
    throw std::runtime_error("unknown algo: '" + algo_name + "'");
  cfg.reject_unknown();

  std::vector<MatrixD> targets = {MatrixD::Constant(m, n, target_value)};
  const auto fitness = make_fitness(fitness_kind, targets);
  std::vector<MatrixF> mu = {MatrixF::Zero(m, n)};

  EsBenchResult result;
  result.initial_error = (mu[0].cast<double>() - targets[0]).norm();

  std::vector<std::string> columns = {"t", "mean_fitness", "best_fitness", "sigma_t",
                                      "alpha_t"};
  if (timings) columns.push_back("wall_ms");
  CsvWriter csv(out_csv, columns);
  double prev_mean = -std::numeric_limits<double>::infinity();
  const auto logs = run(mu, es, algo, fitness,
                        [&](const StepLog& log, const std::vector<MatrixF>&) {
                          std::vector<std::string> row = {
                              fmt_int(static_cast<std::int64_t>(log.t)),
                              fmt_double(log.mean_fitness), fmt_double(log.best_fitness),
                              fmt_double(log.sigma_t), fmt_double(log.alpha_t)};
                          if (timings) row.push_back(fmt_double(log.wall_ms));
                          csv.row(row);
                          if (log.mean_fitness < prev_mean) ++result.mean_loss_violations;
                          prev_mean = log.mean_fitness;
                          return true;
                        });
  result.final_error = (mu[0].cast<double>() - targets[0]).norm();
  result.steps = logs.size();

  if (!checkpoint_out.empty()) {
    EsCheckpoint ck;
    ck.mu = mu;
    ck.t = es.t_max;
    ck.sigma_t = static_cast<float>(es.sigma_at(es.t_max));
    ck.alpha_t = static_cast<float>(es.alpha_at(es.t_max));
    ck.master_seed = es.master_seed;
    save_es_checkpoint(checkpoint_out, ck);
  }
  return result;
}

EggTrainResult run_egg_train(const Config& cfg, const std::string& out_csv,
                             const std::string& checkpoint_out, bool timings) {
  egg::EggDims dims;
  dims.layers = static_cast<int>(cfg.get_int("layers", 6));
  dims.log4_dim = static_cast<int>(cfg.get_int("log4_dim", 3));  // D = 64
  IntTrainConfig train;
  train.pop_size = static_cast<int>(cfg.get_int("pop_size", 512));
  train.sigma_shift = static_cast<int>(cfg.get_int("sigma_shift", 4));
  train.tau = static_cast<std::int32_t>(cfg.get_int("tau", IntTrainConfig{}.tau));
  train.segment_len = static_cast<int>(cfg.get_int("segment_len", 100));
  train.reuse_factor = static_cast<int>(cfg.get_int("reuse_factor", 2));
  train.evals_per_member = static_cast<int>(cfg.get_int("evals_per_member", 1));
  train.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const auto steps = static_cast<std::uint64_t>(cfg.get_int("steps", 300));
  const auto corpus_bytes = static_cast<std::size_t>(cfg.get_int("corpus_bytes", 1 << 20));
  const auto heldout_bytes =
      static_cast<std::size_t>(cfg.get_int("heldout_bytes", 64 << 10));
  const std::string corpus_source = cfg.get_str("corpus", "synthetic");
  const auto corpus_seed =
      static_cast<std::uint64_t>(cfg.get_int("corpus_seed", 1000003));
  cfg.reject_unknown();

  std::vector<std::uint8_t> all_bytes =
      corpus_source == "synthetic"
          ? synthetic_corpus(corpus_seed, corpus_bytes + heldout_bytes)
          : load_corpus(corpus_source);
  if (all_bytes.size() < corpus_bytes + heldout_bytes)
    throw std::runtime_error("corpus too small for the requested train/heldout split");
  const std::span<const std::uint8_t> train_slice(all_bytes.data(), corpus_bytes);
  const std::span<const std::uint8_t> heldout_slice(all_bytes.data() + corpus_bytes,
                                                    heldout_bytes);

  const auto params =
      egg::init_params(dims, derive_stream(train.master_seed, 0, 0, 0, StreamTag::Init));
  const auto pool = NoisePool::build(train.master_seed);
  IntTrainer trainer(params, train, train_slice, pool);

  EggTrainResult result;
  const auto init_eval =
      IntTrainer::eval(trainer.params(), heldout_slice, 0, heldout_slice.size());
  result.init_bits_per_byte = bits_per_byte(init_eval.loss_q16_sum, init_eval.tokens);

  std::vector<std::string> columns = {"step", "mean_loss_q16", "bits_per_byte"};
  if (timings) columns.push_back("wall_ms");
  CsvWriter csv(out_csv, columns);
  for (std::uint64_t t = 0; t < steps; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const IntStepMetrics metrics = trainer.step();
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    const double mean_q16 = static_cast<double>(metrics.loss_q16_sum) /
                            static_cast<double>(std::max<std::int64_t>(metrics.tokens, 1));
    const double bpb = bits_per_byte(metrics.loss_q16_sum, metrics.tokens);
    result.train_bits_per_byte.push_back(bpb);
    std::vector<std::string> row = {fmt_int(static_cast<std::int64_t>(metrics.step)),
                                    fmt_double(mean_q16), fmt_double(bpb)};
    if (timings) row.push_back(fmt_double(wall_ms));
    csv.row(row);
  }
  result.steps = steps;

  const auto final_eval =
      IntTrainer::eval(trainer.params(), heldout_slice, 0, heldout_slice.size());
  result.final_bits_per_byte = bits_per_byte(final_eval.loss_q16_sum, final_eval.tokens);
  csv.comment("heldout_init_bits_per_byte=" + fmt_double(result.init_bits_per_byte));
  csv.comment("heldout_final_bits_per_byte=" + fmt_double(result.final_bits_per_byte));

  if (!checkpoint_out.empty()) {
    EggCheckpoint ck;
    ck.params = trainer.params();
    ck.master_seed = train.master_seed;
    ck.step = trainer.step_index();
    save_egg_checkpoint(checkpoint_out, ck);
  }
  return result;
}

MicrobenchResult run_microbench(const Config& cfg, const std::string& out_csv) {
  const int dim = static_cast<int>(cfg.get_int("dim", 1024));
  const int pop = static_cast<int>(cfg.get_int("pop", 256));
  const int reps = static_cast<int>(cfg.get_int("reps", 3));
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 5));
  cfg.reject_unknown();
  const double sigma = 0.1;

  MatrixD mu(dim, dim);
  {
    const auto draws = fill_gaussian(derive_stream(seed, 0, 0, 0, StreamTag::Init),
                                     static_cast<std::size_t>(dim) * dim, 1.0);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r)
        mu(r, c) = draws[static_cast<std::size_t>(c) * dim + r] / std::sqrt(double(dim));
  }
  MatrixD inputs(pop, dim);
  {
    const auto draws = fill_gaussian(derive_stream(seed, 0, 0, 1, StreamTag::Init),
                                     static_cast<std::size_t>(pop) * dim, 1.0);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < pop; ++r)
        inputs(r, c) = draws[static_cast<std::size_t>(c) * pop + r];
  }

  double sink = 0.0;  // defeats dead-code elimination
  auto time_best = [&](const std::function<void()>& body) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < reps; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      body();
      best = std::min(best, std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count());
    }
    return best;
  };

  // Headline rows time the forward paths with noise already in memory;
  // the *_regen rows fold counter-stream regeneration into the loop.
  std::vector<FactorsD> factors;
  factors.reserve(static_cast<std::size_t>(pop));
  for (int w = 0; w < pop; ++w)
    factors.push_back(sample_factors<double>(
        derive_stream(seed, 1, static_cast<std::uint32_t>(w), 0, StreamTag::FactorA),
        derive_stream(seed, 1, static_cast<std::uint32_t>(w), 0, StreamTag::FactorB),
        dim, dim, 1, FactorDist::gaussian(1.0)));

  // A handful of pre-generated dense perturbations, cycled across members:
  // each member still moves the full m*n matrix through memory, which is
  // the cost being measured, without holding pop * dim^2 doubles.
  constexpr int kDensePool = 8;
  std::vector<MatrixD> dense_pool;
  dense_pool.reserve(kDensePool);
  for (int w = 0; w < kDensePool; ++w) {
    const auto draws = fill_gaussian(
        derive_stream(seed, 2, static_cast<std::uint32_t>(w), 0, StreamTag::FactorA),
        static_cast<std::size_t>(dim) * dim, 1.0);
    MatrixD e(dim, dim);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r)
        e(r, c) = draws[static_cast<std::size_t>(c) * dim + r];
    dense_pool.push_back(std::move(e));
  }

  // Pure batch inference: one shared matrix product.
  MatrixD out(pop, dim);
  const double batch_s = time_best([&] {
    out.noalias() = inputs * mu.transpose();
    sink += out(0, 0);
  });

  // Decomposed population forward: shared product plus rank-1 corrections.
  const double decomposed_s = time_best([&] {
    out.noalias() = inputs * mu.transpose();
    for (int w = 0; w < pop; ++w) {
      const auto& f = factors[static_cast<std::size_t>(w)];
      const double xb = f.B.col(0).dot(inputs.row(w).transpose());
      out.row(w).noalias() += (sigma * xb) * f.A.col(0).transpose();
    }
    sink += out(0, 0);
  });

  // Naive full-rank member: materialize mu + sigma E, then one dense
  // matrix-vector product per member.
  MatrixD dense(dim, dim);
  VectorD y(dim);
  const double naive_s = time_best([&] {
    for (int w = 0; w < pop; ++w) {
      dense.noalias() = mu + sigma * dense_pool[static_cast<std::size_t>(w % kDensePool)];
      y.noalias() = dense * inputs.row(w).transpose();
      sink += y(0);
    }
  });

  // On-the-fly variants: perturbations rebuilt from their streams inside
  // the timed loop.
  const double decomposed_regen_s = time_best([&] {
    out.noalias() = inputs * mu.transpose();
    for (int w = 0; w < pop; ++w) {
      const auto f = sample_factors<double>(
          derive_stream(seed, 1, static_cast<std::uint32_t>(w), 0, StreamTag::FactorA),
          derive_stream(seed, 1, static_cast<std::uint32_t>(w), 0, StreamTag::FactorB),
          dim, dim, 1, FactorDist::gaussian(1.0));
      const double xb = f.B.col(0).dot(inputs.row(w).transpose());
      out.row(w).noalias() += (sigma * xb) * f.A.col(0).transpose();
    }
    sink += out(0, 0);
  });
  const double naive_regen_s = time_best([&] {
    for (int w = 0; w < pop; ++w) {
      const auto key =
          derive_stream(seed, 2, static_cast<std::uint32_t>(w), 0, StreamTag::FactorA);
      const auto draws = fill_gaussian(key, static_cast<std::size_t>(dim) * dim, 1.0);
      for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r)
          dense(r, c) = mu(r, c) + sigma * draws[static_cast<std::size_t>(c) * dim + r];
      y.noalias() = dense * inputs.row(w).transpose();
      sink += y(0);
    }
  });

  MicrobenchResult result;
  result.batch_rows_per_s = pop / batch_s;
  result.decomposed_rows_per_s = pop / decomposed_s;
  result.naive_rows_per_s = pop / naive_s;

  CsvWriter csv(out_csv, {"method", "pop", "dims", "rows_per_second"});
  csv.row({"naive_dense", fmt_int(pop), fmt_int(dim), fmt_double(result.naive_rows_per_s)});
  csv.row({"decomposed", fmt_int(pop), fmt_int(dim),
           fmt_double(result.decomposed_rows_per_s)});
  csv.row({"batch_unperturbed", fmt_int(pop), fmt_int(dim),
           fmt_double(result.batch_rows_per_s)});
  csv.row({"naive_dense_regen", fmt_int(pop), fmt_int(dim),
           fmt_double(pop / naive_regen_s)});
  csv.row({"decomposed_regen", fmt_int(pop), fmt_int(dim),
           fmt_double(pop / decomposed_regen_s)});
  csv.comment("sink=" + fmt_double(sink));
  return result;
}

ThresholdTuneResult run_threshold_tune(const Config& cfg, const std::string& out_csv) {
  std::vector<std::int64_t> taus = {1536, 3072, 6144, 12288, 24576};
  if (cfg.has("taus")) taus = parse_int_list(cfg.get_str("taus", ""));
  else (void)cfg.get_str("taus", "");

  egg::EggDims dims;
  dims.layers = static_cast<int>(cfg.get_int("layers", 6));
  dims.log4_dim = static_cast<int>(cfg.get_int("log4_dim", 3));
  IntTrainConfig base;
  base.pop_size = static_cast<int>(cfg.get_int("pop_size", 512));
  base.sigma_shift = static_cast<int>(cfg.get_int("sigma_shift", 4));
  base.segment_len = static_cast<int>(cfg.get_int("segment_len", 100));
  base.reuse_factor = static_cast<int>(cfg.get_int("reuse_factor", 2));
  base.evals_per_member = static_cast<int>(cfg.get_int("evals_per_member", 1));
  base.master_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const auto steps = static_cast<std::uint64_t>(cfg.get_int("steps", 60));
  const auto corpus_bytes = static_cast<std::size_t>(cfg.get_int("corpus_bytes", 1 << 19));
  const auto heldout_bytes =
      static_cast<std::size_t>(cfg.get_int("heldout_bytes", 32 << 10));
  const auto corpus_seed =
      static_cast<std::uint64_t>(cfg.get_int("corpus_seed", 1000003));
  cfg.reject_unknown();

  const auto all_bytes = synthetic_corpus(corpus_seed, corpus_bytes + heldout_bytes);
  const std::span<const std::uint8_t> train_slice(all_bytes.data(), corpus_bytes);
  const std::span<const std::uint8_t> heldout_slice(all_bytes.data() + corpus_bytes,
                                                    heldout_bytes);
  const auto params =
      egg::init_params(dims, derive_stream(base.master_seed, 0, 0, 0, StreamTag::Init));
  const auto pool = NoisePool::build(base.master_seed);
  const auto init_eval = IntTrainer::eval(params, heldout_slice, 0, heldout_slice.size());
  const double init_bpb = bits_per_byte(init_eval.loss_q16_sum, init_eval.tokens);

  ThresholdTuneResult result;
  CsvWriter csv(out_csv, {"tau", "final_bits_per_byte", "improvement"});
  double best_final = std::numeric_limits<double>::infinity();
  for (const auto tau : taus) {
    IntTrainConfig train = base;
    train.tau = static_cast<std::int32_t>(tau);
    IntTrainer trainer(params, train, train_slice, pool);
    for (std::uint64_t t = 0; t < steps; ++t) trainer.step();
    const auto eval =
        IntTrainer::eval(trainer.params(), heldout_slice, 0, heldout_slice.size());
    const double final_bpb = bits_per_byte(eval.loss_q16_sum, eval.tokens);
    result.taus.push_back(static_cast<std::int32_t>(tau));
    result.final_bits_per_byte.push_back(final_bpb);
    if (final_bpb < best_final) {
      best_final = final_bpb;
      result.best_tau = static_cast<std::int32_t>(tau);
    }
    csv.row({fmt_int(tau), fmt_double(final_bpb), fmt_double(init_bpb - final_bpb)});
  }
  csv.comment("init_bits_per_byte=" + fmt_double(init_bpb));
  csv.comment("best_tau=" + fmt_int(result.best_tau));
  return result;
}

}  // namespace eggroll::harness
