// Versioned binary checkpoints.
//
// ES:  magic "ESCK" | version u32 | n_matrices u32 | (rows u32, cols u32)*
//      | t u64 | sigma_t f32 | alpha_t f32 | master_seed u64
//      | row-major float32 matrix data.
// EGG: magic "EGG1" | layers u32 | log4_dim u32 | master_seed u64
//      | step u64 | raw int8 parameter blocks in declaration order
//      (emb, head, lnout, then per layer ln1, ln2, mlp1, mlp2, wf, uf,
//      wh, uh, bf, bh).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eggroll/egg/model.hpp"
#include "eggroll/lowrank.hpp"

namespace eggroll::harness {

struct EsCheckpoint {
  std::vector<MatrixF> mu;
  std::uint64_t t = 0;
  float sigma_t = 0.0f;
  float alpha_t = 0.0f;
  std::uint64_t master_seed = 0;
};

void save_es_checkpoint(const std::string& path, const EsCheckpoint& ck);
EsCheckpoint load_es_checkpoint(const std::string& path);

struct EggCheckpoint {
  egg::EggParams params;
  std::uint64_t master_seed = 0;
  std::uint64_t step = 0;
};

void save_egg_checkpoint(const std::string& path, const EggCheckpoint& ck);
EggCheckpoint load_egg_checkpoint(const std::string& path);

}  // namespace eggroll::harness
