#include "eggroll/egg/model.hpp"

#include <cmath>

#include "eggroll/prng.hpp"

namespace eggroll::egg {

namespace {

std::vector<std::int8_t> init_matrix(const StreamKey& base, int slot, std::size_t count) {
  const StreamKey key = derive_stream(base.master_seed, base.timestep, base.worker,
                                      static_cast<std::uint32_t>(slot), StreamTag::Init);
  const std::vector<double> draws = fill_gaussian(key, count, 1.0);
  std::vector<std::int8_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long v = std::lround(16.0 * draws[i]);
    out[i] = static_cast<std::int8_t>(v > 127 ? 127 : (v < -127 ? -127 : v));
  }
  return out;
}

}  // namespace

EggParams init_params(const EggDims& dims, const StreamKey& key) {
  const std::size_t d = static_cast<std::size_t>(dims.dim());
  EggParams p;
  p.dims = dims;
  p.emb = init_matrix(key, kEmb, static_cast<std::size_t>(kVocab) * d);
  p.head = init_matrix(key, kHead, static_cast<std::size_t>(kVocab) * d);
  p.lnout.assign(d, 16);
  p.layers.resize(static_cast<std::size_t>(dims.layers));
  for (int l = 0; l < dims.layers; ++l) {
    EggLayer& L = p.layers[static_cast<std::size_t>(l)];
    L.ln1.assign(d, 16);
    L.ln2.assign(d, 16);
    L.bf.assign(d, 0);
    L.bh.assign(d, 0);
    L.wf = init_matrix(key, matrix_slot(l, kWf), d * d);
    L.uf = init_matrix(key, matrix_slot(l, kUf), d * d);
    L.wh = init_matrix(key, matrix_slot(l, kWh), d * d);
    L.uh = init_matrix(key, matrix_slot(l, kUh), d * d);
    L.mlp1 = init_matrix(key, matrix_slot(l, kMlp1), 4 * d * d);
    L.mlp2 = init_matrix(key, matrix_slot(l, kMlp2), d * 4 * d);
  }
  return p;
}

}  // namespace eggroll::egg
