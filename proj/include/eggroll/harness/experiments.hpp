// Experiment drivers behind the CLI subcommands. Each reads its knobs from
// a flat config, writes one CSV (schema-versioned, header row, fixed number
// formatting) and returns a summary struct that the acceptance suite
// asserts against.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eggroll/harness/config.hpp"

namespace eggroll::harness {

struct RankDecayResult {
  std::vector<int> ranks;
  std::vector<double> errors;  // Frobenius error vs the full-rank reference
  double slope = 0.0;          // fitted log-log slope
};
RankDecayResult run_rank_decay(const Config& cfg, const std::string& out_csv);

struct ScorePlotResult {
  std::vector<int> ranks;
  std::vector<double> sup_dist;  // sup |z p_r(z) - z phi(z)| over the grid
};
ScorePlotResult run_score_plot(const Config& cfg, const std::string& out_csv);

struct RankLawCase {
  int pop = 0, rank = 0, m = 0, n = 0;
  int expected = 0, measured = 0;
};
std::vector<RankLawCase> run_rank_law(const Config& cfg, const std::string& out_csv);

struct EsBenchResult {
  double initial_error = 0.0;  // ||mu0 - target||_F
  double final_error = 0.0;
  int mean_loss_violations = 0;  // mean-fitness regressions across steps
  std::uint64_t steps = 0;
};
EsBenchResult run_es_bench(const Config& cfg, const std::string& out_csv,
                           const std::string& checkpoint_out = "", bool timings = false);

struct EggTrainResult {
  double init_bits_per_byte = 0.0;
  double final_bits_per_byte = 0.0;
  std::vector<double> train_bits_per_byte;  // per step
  std::uint64_t steps = 0;
};
EggTrainResult run_egg_train(const Config& cfg, const std::string& out_csv,
                             const std::string& checkpoint_out = "",
                             bool timings = false);

struct MicrobenchResult {
  double naive_rows_per_s = 0.0;
  double decomposed_rows_per_s = 0.0;
  double batch_rows_per_s = 0.0;
};
MicrobenchResult run_microbench(const Config& cfg, const std::string& out_csv);

struct ThresholdTuneResult {
  std::vector<std::int32_t> taus;
  std::vector<double> final_bits_per_byte;
  std::int32_t best_tau = 0;
};
ThresholdTuneResult run_threshold_tune(const Config& cfg, const std::string& out_csv);

}  // namespace eggroll::harness
