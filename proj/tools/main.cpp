// Command-line harness for the low-rank ES engine and the integer GRU
// language model. Every experiment is reproducible byte-for-byte from its
// config and seed; wall-clock columns are opt-in via --timings so default
// outputs stay deterministic.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "eggroll/harness/config.hpp"
#include "eggroll/harness/experiments.hpp"

namespace {

using eggroll::harness::Config;

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::string checkpoint_out;
  std::int64_t seed = -1;
  bool has_seed = false;
  bool timings = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out,
                bool with_checkpoint = false) {
  cmd->add_option("--config", args.config_path, "flat key=value config file");
  cmd->add_option("--out", args.out, "output CSV path")->default_val(default_out);
  auto* seed_opt = cmd->add_option("--seed", args.seed, "master seed override");
  cmd->parse_complete_callback([&args, seed_opt] {
    args.has_seed = seed_opt->count() > 0;
  });
  cmd->add_flag("--timings", args.timings,
                "append wall-clock columns (breaks byte-identical reruns)");
  if (with_checkpoint)
    cmd->add_option("--checkpoint-out", args.checkpoint_out, "checkpoint output path");
}

Config load_config(const CommonArgs& args) {
  Config cfg = args.config_path.empty() ? Config{} : Config::parse_file(args.config_path);
  if (args.has_seed) cfg.set("seed", std::to_string(args.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eggroll: low-rank evolution strategies and integer GRU pretraining"};
  app.require_subcommand(1);

  CommonArgs es_args, egg_args, score_args, decay_args, law_args, bench_args, tune_args;

  auto* es = app.add_subcommand("es-bench", "run the ES optimizer on a synthetic fitness");
  add_common(es, es_args, "es_bench.csv", /*with_checkpoint=*/true);

  auto* egg = app.add_subcommand("egg-train", "pretrain the integer GRU with integer ES");
  add_common(egg, egg_args, "egg_train.csv", /*with_checkpoint=*/true);

  auto* score = app.add_subcommand("score-plot", "marginal density curves per rank");
  add_common(score, score_args, "score_plot.csv");

  auto* decay = app.add_subcommand("rank-decay",
                                   "gradient approximation error against rank");
  add_common(decay, decay_args, "rank_decay.csv");

  auto* law = app.add_subcommand("rank-law", "numerical rank of aggregated updates");
  add_common(law, law_args, "rank_law.csv");

  auto* bench = app.add_subcommand("microbench",
                                   "decomposed vs naive population forward throughput");
  add_common(bench, bench_args, "microbench.csv");

  auto* tune = app.add_subcommand("tune-threshold", "sweep the integer update threshold");
  add_common(tune, tune_args, "tune_threshold.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (es->parsed()) {
      const auto r = eggroll::harness::run_es_bench(load_config(es_args), es_args.out,
                                                    es_args.checkpoint_out,
                                                    es_args.timings);
      std::printf("es-bench: %llu steps, error %.6g -> %.6g (%s)\n",
                  static_cast<unsigned long long>(r.steps), r.initial_error,
                  r.final_error, es_args.out.c_str());
    } else if (egg->parsed()) {
      const auto r = eggroll::harness::run_egg_train(load_config(egg_args), egg_args.out,
                                                     egg_args.checkpoint_out,
                                                     egg_args.timings);
      std::printf("egg-train: %llu steps, held-out %.4f -> %.4f bits/byte (%s)\n",
                  static_cast<unsigned long long>(r.steps), r.init_bits_per_byte,
                  r.final_bits_per_byte, egg_args.out.c_str());
    } else if (score->parsed()) {
      const auto r = eggroll::harness::run_score_plot(load_config(score_args),
                                                      score_args.out);
      for (std::size_t i = 0; i < r.ranks.size(); ++i)
        std::printf("score-plot: r=%d sup|z p_r - z phi| = %.5f\n", r.ranks[i],
                    r.sup_dist[i]);
    } else if (decay->parsed()) {
      const auto r = eggroll::harness::run_rank_decay(load_config(decay_args),
                                                      decay_args.out);
      std::printf("rank-decay: slope %.4f (%s)\n", r.slope, decay_args.out.c_str());
    } else if (law->parsed()) {
      const auto cases = eggroll::harness::run_rank_law(load_config(law_args),
                                                        law_args.out);
      for (const auto& c : cases)
        std::printf("rank-law: N=%d r=%d %dx%d expected %d measured %d\n", c.pop, c.rank,
                    c.m, c.n, c.expected, c.measured);
    } else if (bench->parsed()) {
      const auto r = eggroll::harness::run_microbench(load_config(bench_args),
                                                      bench_args.out);
      std::printf(
          "microbench: naive %.1f rows/s, decomposed %.1f rows/s, batch %.1f rows/s\n",
          r.naive_rows_per_s, r.decomposed_rows_per_s, r.batch_rows_per_s);
    } else if (tune->parsed()) {
      const auto r = eggroll::harness::run_threshold_tune(load_config(tune_args),
                                                          tune_args.out);
      std::printf("tune-threshold: best tau %d (%s)\n", r.best_tau, tune_args.out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
