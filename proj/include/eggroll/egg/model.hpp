// EGG: a byte-level GRU language model whose forward pass never leaves
// integer arithmetic. Weights and activations are int8 in [-127, 127],
// matmuls accumulate in int32 and rescale by an arithmetic right shift,
// saturation supplies the nonlinearity, and the loss is evaluated through
// integer exp2/log2 in 1/16-bit units.
#pragma once

#include <cstdint>
#include <vector>

#include "eggroll/egg/intops.hpp"
#include "eggroll/egg/tables.hpp"
#include "eggroll/prng_core.hpp"

namespace eggroll::egg {

inline constexpr int kVocab = 256;

struct EggDims {
  int layers = 6;
  int log4_dim = 3;  // hidden dimension D = 4^log4_dim

  int dim() const { return 1 << (2 * log4_dim); }
  std::int64_t param_count() const {
    const std::int64_t d = dim();
    return 513 * d + static_cast<std::int64_t>(layers) * (4 * d + 12 * d * d);
  }
  int matrix_count() const { return 2 + 6 * layers; }
};

// Stream-addressing slots for the perturbable matrix parameters.
// LN weights and biases are vectors, not matmuls; they carry no
// perturbation and are frozen at their initial values.
enum MatrixSlot : int { kEmb = 0, kHead = 1, kLayerBase = 2, kSlotsPerLayer = 6 };
enum LayerMatrix : int { kWf = 0, kUf = 1, kWh = 2, kUh = 3, kMlp1 = 4, kMlp2 = 5 };

inline int matrix_slot(int layer, LayerMatrix which) {
  return kLayerBase + layer * kSlotsPerLayer + static_cast<int>(which);
}

struct EggLayer {
  std::vector<std::int8_t> ln1, ln2;          // D
  std::vector<std::int8_t> mlp1;              // 4D x D, row-major
  std::vector<std::int8_t> mlp2;              // D x 4D, row-major
  std::vector<std::int8_t> wf, uf, wh, uh;    // D x D, row-major
  std::vector<std::int8_t> bf, bh;            // D
};

struct EggParams {
  EggDims dims;
  std::vector<std::int8_t> emb;    // 256 x D, row t = embedding of byte t
  std::vector<std::int8_t> head;   // 256 x D
  std::vector<std::int8_t> lnout;  // D
  std::vector<EggLayer> layers;
};

struct EggState {
  std::vector<std::int8_t> s;  // layers x D, zero-initialized

  static EggState zero(const EggDims& d) {
    EggState st;
    st.s.assign(static_cast<std::size_t>(d.layers) * d.dim(), 0);
    return st;
  }

  friend bool operator==(const EggState&, const EggState&) = default;
};

// Matrices: round(16 * N(0,1)) clamped; LN weights 16; biases 0.
// Deterministic in the key (per-matrix streams derived via the slot id).
EggParams init_params(const EggDims& dims, const StreamKey& key);

// Rank-1 integer perturbations for one population member. Slots with a
// null pointer run unperturbed. `sign` is the antithetic flip: the odd
// member of a pair negates A, exactly mirroring the positive member's
// correction before the shared shift.
struct EggNoise {
  struct Rank1 {
    const std::int8_t* a = nullptr;  // output-dim vector
    const std::int8_t* b = nullptr;  // input-dim vector
  };
  std::vector<Rank1> mats;  // indexed by matrix slot
  int sigma_shift = 4;      // sigma = 2^-sigma_shift
  int sign = 1;
};

struct EggScratch {
  std::vector<std::int8_t> ln;       // D
  std::vector<std::int8_t> tmp;      // D, second matmul operand
  std::vector<std::int8_t> gru_out;  // D
  std::vector<std::int8_t> mlp_mid;  // 4D
  std::vector<std::int8_t> mlp_out;  // D
  std::vector<std::int8_t> resid;    // D, residual stream
  std::vector<std::int8_t> f, fhat, hhat;  // D

  static EggScratch make(const EggDims& d) {
    EggScratch s;
    const std::size_t dim = static_cast<std::size_t>(d.dim());
    s.ln.resize(dim);
    s.tmp.resize(dim);
    s.gru_out.resize(dim);
    s.mlp_mid.resize(4 * dim);
    s.mlp_out.resize(dim);
    s.resid.resize(dim);
    s.f.resize(dim);
    s.fhat.resize(dim);
    s.hhat.resize(dim);
    return s;
  }
};

// out_j = sat8((sum_c mat[j,c] x[c] + rank-1 correction) >> (4 + log4_n)).
// The correction ((x . b) * sign * a_j) >> (4 + sigma_shift) is added to the
// int32 accumulator before the scaling shift, widened to 64-bit so the
// product cannot wrap.
inline void scaled_matmul(const std::int8_t* __restrict x,
                          const std::int8_t* __restrict mat, int m, int n, int log4_n,
                          std::int8_t* __restrict out,
                          const EggNoise::Rank1* pert = nullptr, int sigma_shift = 0,
                          int sign = 1) {
  const int shift = 4 + log4_n;
  std::int64_t xb = 0;
  const bool perturbed = pert != nullptr && pert->a != nullptr;
  if (perturbed) {
    std::int32_t dot = 0;
    for (int c = 0; c < n; ++c)
      dot += static_cast<std::int32_t>(x[c]) * pert->b[c];
    xb = dot;
  }
  for (int j = 0; j < m; ++j) {
    const std::int8_t* row = mat + static_cast<std::size_t>(j) * n;
    std::int32_t acc = 0;
    for (int c = 0; c < n; ++c)
      acc += static_cast<std::int32_t>(row[c]) * x[c];
    std::int64_t wide = acc;
    if (perturbed)
      wide += shr64(xb * (sign * static_cast<std::int32_t>(pert->a[j])),
                    4 + sigma_shift);
    out[j] = sat8_64(shr64(wide, shift));
  }
}

// Embedding lookup with the one-hot interpretation of the rank-1 noise:
// x . b collapses to b[token].
inline void embed(const EggParams& p, std::uint8_t token, std::int8_t* __restrict out,
                  const EggNoise* noise = nullptr) {
  const int d = p.dims.dim();
  const std::int8_t* row = p.emb.data() + static_cast<std::size_t>(token) * d;
  const EggNoise::Rank1* pert =
      noise != nullptr && noise->mats[kEmb].a != nullptr ? &noise->mats[kEmb] : nullptr;
  if (pert == nullptr) {
    for (int i = 0; i < d; ++i) out[i] = row[i];
    return;
  }
  const std::int32_t bt = pert->b[token];
  for (int i = 0; i < d; ++i) {
    const std::int64_t corr = shr64(
        static_cast<std::int64_t>(bt) * (noise->sign * static_cast<std::int32_t>(pert->a[i])),
        4 + noise->sigma_shift);
    out[i] = sat8_64(row[i] + corr);
  }
}

// x_mav = sat8(sum(|x|) >> 2d); out_i = DIVIDE(x_i * w_i, x_mav).
// All-zero x gives x_mav = 0 and, by the DIVIDE(., 0) = 0 convention,
// an all-zero output.
inline void layer_norm(const std::int8_t* __restrict x, const std::int8_t* __restrict w,
                       int d_dim, int log4_d, const LookupTables& tbl,
                       std::int8_t* __restrict out) {
  std::int32_t sum = 0;
  for (int i = 0; i < d_dim; ++i)
    sum += x[i] >= 0 ? x[i] : -static_cast<std::int32_t>(x[i]);
  const std::int8_t mav = sat8(shr(sum, 2 * log4_d));
  const std::uint8_t b = static_cast<std::uint8_t>(mav);
  for (int i = 0; i < d_dim; ++i) {
    const std::int16_t prod =
        static_cast<std::int16_t>(static_cast<std::int32_t>(x[i]) * w[i]);
    out[i] = tbl.div(prod, b);
  }
}

inline const EggNoise::Rank1* noise_slot(const EggNoise* noise, int slot) {
  if (noise == nullptr) return nullptr;
  const auto& r = noise->mats[static_cast<std::size_t>(slot)];
  return r.a != nullptr ? &r : nullptr;
}

// f gates in [-127, 127]; f + 127 plays the role of a [0, 254] sigmoid
// gate, rescaled by >> 8 after each product.
inline void gru_forward(const EggParams& p, int layer, const std::int8_t* __restrict x,
                        const std::int8_t* __restrict s, std::int8_t* __restrict h,
                        EggScratch& scr, const EggNoise* noise = nullptr) {
  const int d = p.dims.dim();
  const int log4_d = p.dims.log4_dim;
  const EggLayer& L = p.layers[static_cast<std::size_t>(layer)];
  const int ss = noise != nullptr ? noise->sigma_shift : 0;
  const int sign = noise != nullptr ? noise->sign : 1;

  std::int8_t* xw = scr.tmp.data();  // reused per matmul
  std::int8_t* f = scr.f.data();
  std::int8_t* fhat = scr.fhat.data();
  std::int8_t* hhat = scr.hhat.data();

  scaled_matmul(x, L.wf.data(), d, d, log4_d, f,
                noise_slot(noise, matrix_slot(layer, kWf)), ss, sign);
  scaled_matmul(s, L.uf.data(), d, d, log4_d, xw,
                noise_slot(noise, matrix_slot(layer, kUf)), ss, sign);
  for (int i = 0; i < d; ++i)
    f[i] = sat8(static_cast<std::int32_t>(f[i]) + xw[i] + L.bf[i]);

  for (int i = 0; i < d; ++i) {
    const std::int32_t gate = static_cast<std::int32_t>(f[i]) + 127;
    fhat[i] = sat8(shr(gate * s[i], 8));
  }

  scaled_matmul(x, L.wh.data(), d, d, log4_d, hhat,
                noise_slot(noise, matrix_slot(layer, kWh)), ss, sign);
  scaled_matmul(fhat, L.uh.data(), d, d, log4_d, xw,
                noise_slot(noise, matrix_slot(layer, kUh)), ss, sign);
  for (int i = 0; i < d; ++i)
    hhat[i] = sat8(static_cast<std::int32_t>(hhat[i]) + xw[i] + L.bh[i]);

  // Outer addition saturates, like every other narrowing in the model.
  for (int i = 0; i < d; ++i) {
    const std::int32_t gate = static_cast<std::int32_t>(f[i]) + 127;
    const std::int32_t delta = static_cast<std::int32_t>(hhat[i]) - s[i];
    const std::int8_t blend = sat8(shr(gate * delta, 8));
    h[i] = sat8(static_cast<std::int32_t>(s[i]) + blend);
  }
}

// Two scaled matmuls, no activation; the saturated narrowing is the
// nonlinearity.
inline void mlp_forward(const EggParams& p, int layer, const std::int8_t* __restrict x,
                        std::int8_t* __restrict out, EggScratch& scr,
                        const EggNoise* noise = nullptr) {
  const int d = p.dims.dim();
  const int log4_d = p.dims.log4_dim;
  const EggLayer& L = p.layers[static_cast<std::size_t>(layer)];
  const int ss = noise != nullptr ? noise->sigma_shift : 0;
  const int sign = noise != nullptr ? noise->sign : 1;
  scaled_matmul(x, L.mlp1.data(), 4 * d, d, log4_d, scr.mlp_mid.data(),
                noise_slot(noise, matrix_slot(layer, kMlp1)), ss, sign);
  scaled_matmul(scr.mlp_mid.data(), L.mlp2.data(), d, 4 * d, log4_d + 1, out,
                noise_slot(noise, matrix_slot(layer, kMlp2)), ss, sign);
}

// Alg. "embed, then per layer pre-LN GRU and MLP with saturated residual
// adds, final LN + head matmul". state_in and state_out may alias.
inline void egg_forward(const EggParams& p, const LookupTables& tbl, std::uint8_t token,
                        const std::int8_t* state_in, std::int8_t* state_out,
                        std::int8_t* __restrict logits, EggScratch& scr,
                        const EggNoise* noise = nullptr) {
  const int d = p.dims.dim();
  const int log4_d = p.dims.log4_dim;
  std::int8_t* y = scr.resid.data();
  embed(p, token, y, noise);
  for (int l = 0; l < p.dims.layers; ++l) {
    const EggLayer& L = p.layers[static_cast<std::size_t>(l)];
    const std::int8_t* s_in = state_in + static_cast<std::size_t>(l) * d;
    std::int8_t* s_out = state_out + static_cast<std::size_t>(l) * d;

    layer_norm(y, L.ln1.data(), d, log4_d, tbl, scr.ln.data());
    gru_forward(p, l, scr.ln.data(), s_in, scr.gru_out.data(), scr, noise);
    for (int i = 0; i < d; ++i) s_out[i] = scr.gru_out[i];
    for (int i = 0; i < d; ++i)
      y[i] = sat8(static_cast<std::int32_t>(scr.gru_out[i]) + y[i]);

    layer_norm(y, L.ln2.data(), d, log4_d, tbl, scr.ln.data());
    mlp_forward(p, l, scr.ln.data(), scr.mlp_out.data(), scr, noise);
    for (int i = 0; i < d; ++i)
      y[i] = sat8(static_cast<std::int32_t>(scr.mlp_out[i]) + y[i]);
  }
  layer_norm(y, p.lnout.data(), d, log4_d, tbl, scr.ln.data());
  scaled_matmul(scr.ln.data(), p.head.data(), kVocab, d, log4_d, logits,
                noise_slot(noise, kHead), noise ? noise->sigma_shift : 0,
                noise ? noise->sign : 1);
}

// Scaled integer log-likelihood of the next byte, in 1/16-bit units;
// larger is better, bounded above by table rounding slack (~2).
inline std::int32_t token_loss(const std::int8_t* logits, std::uint8_t next,
                               const LookupTables& tbl) {
  std::uint32_t sum = 0;
  for (int i = 0; i < kVocab; ++i)
    sum += static_cast<std::uint32_t>(
        tbl.exp2[static_cast<std::size_t>(static_cast<std::int32_t>(logits[i]) + 128)]);
  return (static_cast<std::int32_t>(logits[next]) + 128) - log2_lut(sum);
}

}  // namespace eggroll::egg
