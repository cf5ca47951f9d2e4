// Integer-only EGGROLL training of EGG: rank-1 int8 perturbations inserted
// into every matrix multiply, antithetic sign shaping, and a threshold
// update that moves each weight at most one bin per step. Hidden states
// carry across updates (truncated ES) and reset at 0x00 document
// boundaries. Everything on the step path is integer arithmetic; the only
// floating point is the one-off Gaussian noise pool precompute.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eggroll/egg/model.hpp"
#include "eggroll/parallel.hpp"
#include "eggroll/prng_core.hpp"

namespace eggroll {

// Pool of round(16 * N(0,1)) int8 values, indexed with integer PRNG draws
// during training so the step itself never touches floating point.
struct NoisePool {
  std::vector<std::int8_t> values;

  // size must be a power of two. Built from the Init stream of the seed.
  static NoisePool build(std::uint64_t master_seed, std::size_t size = 1u << 16);
};

struct IntTrainConfig {
  int pop_size = 512;     // even, antithetic pairs
  int sigma_shift = 4;    // sigma = 2^-sigma_shift
  std::int32_t tau = 6144;  // |E| must exceed this to move a weight one bin
  int segment_len = 100;  // tokens per member per update
  int reuse_factor = 2;   // members sharing one data stream (even, >= 2)
  int evals_per_member = 1;  // streams per member (equal-data controls)
  std::uint64_t master_seed = 0;

  void validate() const;
  int pairs() const { return pop_size / 2; }
  int streams() const { return pop_size / reuse_factor * evals_per_member; }
};

struct IntStepMetrics {
  std::uint64_t step = 0;
  std::int64_t loss_q16_sum = 0;  // sum of token log-likelihoods, 1/16-bit units
  std::int64_t tokens = 0;
  int sign_pos = 0, sign_neg = 0, sign_zero = 0;
  std::int64_t weights_moved = 0;
  int streams_wrapped = 0;
};

struct EvalLoss {
  std::int64_t loss_q16_sum = 0;
  std::int64_t tokens = 0;
};

// One member's perturbation vectors for one matrix parameter.
struct IntPerturbation {
  std::vector<std::int8_t> a;  // output dim
  std::vector<std::int8_t> b;  // input dim
  int sigma_shift = 4;
};

// Spec surface of the perturbed multiply; forwards to the model kernel.
inline void int_perturbed_matmul(std::span<const std::int8_t> x,
                                 std::span<const std::int8_t> theta, int m, int n,
                                 int log4_n, const IntPerturbation& pert, int sign,
                                 std::span<std::int8_t> out) {
  egg::EggNoise::Rank1 r1{pert.a.empty() ? nullptr : pert.a.data(),
                          pert.b.empty() ? nullptr : pert.b.data()};
  egg::scaled_matmul(x.data(), theta.data(), m, n, log4_n, out.data(),
                     r1.a != nullptr ? &r1 : nullptr, pert.sigma_shift, sign);
}

// E = (F . A)^T B with exact int32 arithmetic; A is n_members x m, B is
// n_members x n, row per member.
inline std::vector<std::int32_t> int_aggregate(std::span<const std::int8_t> a,
                                               std::span<const std::int8_t> b,
                                               std::span<const std::int8_t> f, int m,
                                               int n) {
  const int members = static_cast<int>(f.size());
  std::vector<std::int32_t> e(static_cast<std::size_t>(m) * n, 0);
  for (int w = 0; w < members; ++w) {
    const std::int32_t fw = f[static_cast<std::size_t>(w)];
    if (fw == 0) continue;
    const std::int8_t* aw = a.data() + static_cast<std::size_t>(w) * m;
    const std::int8_t* bw = b.data() + static_cast<std::size_t>(w) * n;
    for (int i = 0; i < m; ++i) {
      const std::int32_t fa = fw * aw[i];
      std::int32_t* row = e.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) row[j] += fa * bw[j];
    }
  }
  return e;
}

// theta_ij moves one bin toward sign(E_ij) when |E_ij| > tau, clamped to
// the valid int8 range. tau = INT32_MAX freezes the parameters.
inline std::int64_t int_update(std::span<std::int8_t> theta,
                               std::span<const std::int32_t> e, std::int32_t tau) {
  std::int64_t moved = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const std::int32_t v = e[i];
    if (v > tau) {
      if (theta[i] < 127) ++theta[i];
      ++moved;
    } else if (v < -tau) {
      if (theta[i] > -127) --theta[i];
      ++moved;
    }
  }
  return moved;
}

namespace detail {

// Fill a perturbation vector by indexing the noise pool with counter draws.
inline void fill_from_pool(const NoisePool& pool, const StreamKey& key, std::int8_t* out,
                           int count) {
  U64Stream stream(key);
  const std::uint64_t size = pool.values.size();
  for (int i = 0; i < count; ++i)
    out[i] = pool.values[bounded_u64(stream.next(), size)];
}

struct SlotShape {
  int m = 0;  // output dim (a length)
  int n = 0;  // input dim (b length)
};

inline SlotShape slot_shape(const egg::EggDims& dims, int slot) {
  const int d = dims.dim();
  if (slot == egg::kEmb) return {d, egg::kVocab};
  if (slot == egg::kHead) return {egg::kVocab, d};
  switch ((slot - egg::kLayerBase) % egg::kSlotsPerLayer) {
    case egg::kMlp1:
      return {4 * d, d};
    case egg::kMlp2:
      return {d, 4 * d};
    default:
      return {d, d};
  }
}

inline std::int8_t* slot_data(egg::EggParams& p, int slot) {
  if (slot == egg::kEmb) return p.emb.data();
  if (slot == egg::kHead) return p.head.data();
  const int layer = (slot - egg::kLayerBase) / egg::kSlotsPerLayer;
  egg::EggLayer& L = p.layers[static_cast<std::size_t>(layer)];
  switch ((slot - egg::kLayerBase) % egg::kSlotsPerLayer) {
    case egg::kWf:
      return L.wf.data();
    case egg::kUf:
      return L.uf.data();
    case egg::kWh:
      return L.wh.data();
    case egg::kUh:
      return L.uh.data();
    case egg::kMlp1:
      return L.mlp1.data();
    default:
      return L.mlp2.data();
  }
}

}  // namespace detail

// Truncated-ES trainer. The trajectory is a pure function of
// (initial params, config, corpus): perturbations are regenerated from
// counter streams at both evaluation and update time, member evaluations
// are order-independent, and the update reduces pairs in ascending order.
class IntTrainer {
 public:
  IntTrainer(egg::EggParams params, IntTrainConfig cfg,
             std::span<const std::uint8_t> corpus, const NoisePool& pool)
      : params_(std::move(params)), cfg_(cfg), corpus_(corpus), pool_(&pool) {
    cfg_.validate();
    const int n_states = cfg_.pop_size * cfg_.evals_per_member;
    states_.assign(static_cast<std::size_t>(n_states),
                   egg::EggState::zero(params_.dims));
    stream_origin_.resize(static_cast<std::size_t>(cfg_.streams()));
    for (int s = 0; s < cfg_.streams(); ++s) {
      const StreamKey k = derive_stream(cfg_.master_seed, 0,
                                        static_cast<std::uint32_t>(s), 0,
                                        StreamTag::Data);
      stream_origin_[static_cast<std::size_t>(s)] =
          bounded_u64(U64Stream(k).at(0), corpus_.size());
    }
  }

  const egg::EggParams& params() const { return params_; }
  egg::EggParams& mutable_params() { return params_; }
  const std::vector<egg::EggState>& states() const { return states_; }
  std::uint64_t step_index() const { return step_; }
  void set_step_index(std::uint64_t t) { step_ = t; }

  // Byte offset of stream s at step t; segments tile the corpus and wrap.
  std::uint64_t cursor(int s, std::uint64_t t) const {
    return (stream_origin_[static_cast<std::size_t>(s)] +
            t * static_cast<std::uint64_t>(cfg_.segment_len)) %
           corpus_.size();
  }

  IntStepMetrics step() {
    const std::uint64_t t = step_;
    const int pairs = cfg_.pairs();
    const int q = cfg_.evals_per_member;
    const int slots = params_.dims.matrix_count();

    std::vector<std::int8_t> pair_sign(static_cast<std::size_t>(pairs), 0);
    std::vector<std::int64_t> pair_loss(static_cast<std::size_t>(pairs) * 2, 0);

    const egg::LookupTables& tbl = egg::LookupTables::get();
    parallel_for(pairs, [&](int p) {
      PairNoise noise = make_pair_noise(p, t);
      egg::EggScratch scratch = egg::EggScratch::make(params_.dims);
      std::array<std::int8_t, egg::kVocab> logits;
      const int group = (2 * p) / cfg_.reuse_factor;
      std::int64_t loss[2] = {0, 0};
      const std::size_t state_dim = states_[0].s.size();
      for (int member = 0; member < 2; ++member) {
        const egg::EggNoise view = noise.view(member == 0 ? 1 : -1);
        for (int e = 0; e < q; ++e) {
          const int stream = group * q + e;
          std::int8_t* state =
              states_[static_cast<std::size_t>((2 * p + member) * q + e)].s.data();
          std::uint64_t pos = cursor(stream, t);
          for (int k = 0; k < cfg_.segment_len; ++k) {
            const std::uint8_t tok = corpus_[pos];
            const std::uint8_t next = corpus_[(pos + 1) % corpus_.size()];
            if (tok == 0)
              for (std::size_t sv = 0; sv < state_dim; ++sv) state[sv] = 0;
            egg::egg_forward(params_, tbl, tok, state, state, logits.data(), scratch,
                             &view);
            loss[member] += egg::token_loss(logits.data(), next, tbl);
            pos = (pos + 1) % corpus_.size();
          }
        }
      }
      pair_loss[static_cast<std::size_t>(p) * 2] = loss[0];
      pair_loss[static_cast<std::size_t>(p) * 2 + 1] = loss[1];
      pair_sign[static_cast<std::size_t>(p)] =
          loss[0] > loss[1] ? 1 : (loss[0] < loss[1] ? -1 : 0);
    });

    IntStepMetrics metrics;
    metrics.step = t;
    for (int p = 0; p < pairs; ++p) {
      metrics.loss_q16_sum += pair_loss[static_cast<std::size_t>(p) * 2] +
                              pair_loss[static_cast<std::size_t>(p) * 2 + 1];
      const int s = pair_sign[static_cast<std::size_t>(p)];
      if (s > 0)
        ++metrics.sign_pos;
      else if (s < 0)
        ++metrics.sign_neg;
      else
        ++metrics.sign_zero;
    }
    metrics.tokens = static_cast<std::int64_t>(cfg_.pop_size) * q * cfg_.segment_len;
    for (int s = 0; s < cfg_.streams(); ++s)
      if (cursor(s, t) + static_cast<std::uint64_t>(cfg_.segment_len) >= corpus_.size())
        ++metrics.streams_wrapped;

    // Update phase: single writer per matrix slot, pairs reduced in
    // ascending order; each pair contributes 2 * sign * a b^T (both
    // antithetic members fold onto the same outer product).
    std::vector<std::int64_t> moved(static_cast<std::size_t>(slots), 0);
    parallel_for(slots, [&](int slot) {
      const auto shape = detail::slot_shape(params_.dims, slot);
      std::vector<std::int32_t> e(static_cast<std::size_t>(shape.m) * shape.n, 0);
      std::vector<std::int8_t> a(static_cast<std::size_t>(shape.m));
      std::vector<std::int8_t> b(static_cast<std::size_t>(shape.n));
      bool any = false;
      for (int p = 0; p < pairs; ++p) {
        const std::int32_t f2 = 2 * pair_sign[static_cast<std::size_t>(p)];
        if (f2 == 0) continue;
        any = true;
        regen_slot(p, t, slot, a.data(), b.data());
        for (int i = 0; i < shape.m; ++i) {
          const std::int32_t fa = f2 * a[static_cast<std::size_t>(i)];
          if (fa == 0) continue;
          std::int32_t* row = e.data() + static_cast<std::size_t>(i) * shape.n;
          for (int j = 0; j < shape.n; ++j) row[j] += fa * b[static_cast<std::size_t>(j)];
        }
      }
      if (!any) return;
      std::int8_t* theta = detail::slot_data(params_, slot);
      if (slot == egg::kEmb) {
        // emb is stored vocab-major (256 x D) while E follows the matmul
        // orientation (D x 256).
        const int d = shape.m;
        std::int64_t local = 0;
        for (int tok = 0; tok < egg::kVocab; ++tok) {
          for (int i = 0; i < d; ++i) {
            const std::int32_t v = e[static_cast<std::size_t>(i) * egg::kVocab + tok];
            std::int8_t& w = theta[static_cast<std::size_t>(tok) * d + i];
            if (v > cfg_.tau) {
              if (w < 127) ++w;
              ++local;
            } else if (v < -cfg_.tau) {
              if (w > -127) --w;
              ++local;
            }
          }
        }
        moved[static_cast<std::size_t>(slot)] = local;
      } else {
        moved[static_cast<std::size_t>(slot)] = int_update(
            std::span<std::int8_t>(theta, e.size()), e, cfg_.tau);
      }
    });
    for (int s = 0; s < slots; ++s) metrics.weights_moved += moved[static_cast<std::size_t>(s)];

    ++step_;
    return metrics;
  }

  // Mean loss of the unperturbed model over corpus[start, start+len), fresh
  // state, resetting at document boundaries. Pure integer.
  static EvalLoss eval(const egg::EggParams& params,
                       std::span<const std::uint8_t> corpus, std::uint64_t start,
                       std::uint64_t len) {
    EvalLoss out;
    egg::EggState state = egg::EggState::zero(params.dims);
    egg::EggScratch scratch = egg::EggScratch::make(params.dims);
    std::array<std::int8_t, egg::kVocab> logits;
    for (std::uint64_t k = 0; k + 1 < len; ++k) {
      const std::uint8_t tok = corpus[(start + k) % corpus.size()];
      const std::uint8_t next = corpus[(start + k + 1) % corpus.size()];
      if (tok == 0)
        for (auto& sv : state.s) sv = 0;
      egg::egg_forward(params, egg::LookupTables::get(), tok, state.s.data(),
                       state.s.data(), logits.data(), scratch);
      out.loss_q16_sum += egg::token_loss(logits.data(), next, egg::LookupTables::get());
      ++out.tokens;
    }
    return out;
  }

 private:
  // Owning buffers for one pair's perturbation vectors across all slots.
  struct PairNoise {
    std::vector<std::vector<std::int8_t>> a, b;
    int sigma_shift = 4;

    egg::EggNoise view(int sign) const {
      egg::EggNoise n;
      n.sigma_shift = sigma_shift;
      n.sign = sign;
      n.mats.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        n.mats[i] = {a[i].data(), b[i].data()};
      return n;
    }
  };

  PairNoise make_pair_noise(int pair, std::uint64_t t) const {
    const int slots = params_.dims.matrix_count();
    PairNoise noise;
    noise.sigma_shift = cfg_.sigma_shift;
    noise.a.resize(static_cast<std::size_t>(slots));
    noise.b.resize(static_cast<std::size_t>(slots));
    for (int slot = 0; slot < slots; ++slot) {
      const auto shape = detail::slot_shape(params_.dims, slot);
      noise.a[static_cast<std::size_t>(slot)].resize(static_cast<std::size_t>(shape.m));
      noise.b[static_cast<std::size_t>(slot)].resize(static_cast<std::size_t>(shape.n));
      regen_slot(pair, t, slot, noise.a[static_cast<std::size_t>(slot)].data(),
                 noise.b[static_cast<std::size_t>(slot)].data());
    }
    return noise;
  }

  // Pair index keys the factors, so the antithetic negation is exact by
  // construction and the update phase can rebuild them without storage.
  void regen_slot(int pair, std::uint64_t t, int slot, std::int8_t* a,
                  std::int8_t* b) const {
    const auto shape = detail::slot_shape(params_.dims, slot);
    detail::fill_from_pool(
        *pool_,
        derive_stream(cfg_.master_seed, t, static_cast<std::uint32_t>(pair),
                      static_cast<std::uint32_t>(slot), StreamTag::FactorA),
        a, shape.m);
    detail::fill_from_pool(
        *pool_,
        derive_stream(cfg_.master_seed, t, static_cast<std::uint32_t>(pair),
                      static_cast<std::uint32_t>(slot), StreamTag::FactorB),
        b, shape.n);
  }

  egg::EggParams params_;
  IntTrainConfig cfg_;
  std::span<const std::uint8_t> corpus_;
  const NoisePool* pool_;
  std::vector<egg::EggState> states_;
  std::vector<std::uint64_t> stream_origin_;
  std::uint64_t step_ = 0;
};

}  // namespace eggroll
