// Counter-based deterministic random streams (Philox-4x64, 10 rounds).
//
// Every stream is addressed by a StreamKey: (master_seed, timestep, worker,
// layer, tag). Two equal keys always produce bit-identical sequences, so any
// process can reconstruct any other process's draws from the five scalars
// alone. No state is shared; everything here is pure integer arithmetic.
#pragma once

#include <array>
#include <cstdint>

namespace eggroll {

enum class StreamTag : std::uint8_t {
  FactorA = 0,
  FactorB = 1,
  Data = 2,
  Init = 3,
};

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t timestep = 0;
  std::uint32_t worker = 0;
  std::uint32_t layer = 0;
  StreamTag tag = StreamTag::FactorA;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

constexpr StreamKey derive_stream(std::uint64_t master_seed, std::uint64_t timestep,
                                  std::uint32_t worker, std::uint32_t layer,
                                  StreamTag tag) {
  return StreamKey{master_seed, timestep, worker, layer, tag};
}

namespace detail {

// Philox-4x64 round constants (Salmon et al. multipliers, Weyl key bumps).
inline constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

inline void philox_round(std::array<std::uint64_t, 4>& ctr,
                         const std::array<std::uint64_t, 2>& key) {
  const unsigned __int128 p0 = static_cast<unsigned __int128>(kPhiloxM0) * ctr[0];
  const unsigned __int128 p1 = static_cast<unsigned __int128>(kPhiloxM1) * ctr[2];
  const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
  const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
  const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
  const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

// One Philox block: 4 output words from (key, counter). Pure function.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 2> key,
                                               std::array<std::uint64_t, 4> ctr) {
  for (int round = 0; round < 9; ++round) {
    detail::philox_round(ctr, key);
    key[0] += detail::kPhiloxW0;
    key[1] += detail::kPhiloxW1;
  }
  detail::philox_round(ctr, key);
  return ctr;
}

// Sequential view of the stream named by a StreamKey. The cipher key carries
// (master_seed, timestep); worker/layer/tag live in fixed counter words and
// the block index occupies counter word 0, so draw k is addressable as
// block k/4, lane k%4 without generating draws 0..k-1.
class U64Stream {
 public:
  explicit U64Stream(const StreamKey& k)
      : key_{k.master_seed, k.timestep},
        base_{0, static_cast<std::uint64_t>(k.layer) |
                     (static_cast<std::uint64_t>(k.tag) << 32),
              static_cast<std::uint64_t>(k.worker), 0} {}

  std::uint64_t next() {
    if (lane_ == 4) refill();
    return block_[lane_++];
  }

  // Random access: draw at absolute index i in this stream.
  std::uint64_t at(std::uint64_t i) const {
    auto ctr = base_;
    ctr[0] = i / 4;
    return philox4x64(key_, ctr)[i % 4];
  }

  void seek(std::uint64_t draw_index) {
    next_block_ = draw_index / 4;
    refill();
    lane_ = static_cast<unsigned>(draw_index % 4);
  }

 private:
  void refill() {
    auto ctr = base_;
    ctr[0] = next_block_++;
    block_ = philox4x64(key_, ctr);
    lane_ = 0;
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> base_;
  std::array<std::uint64_t, 4> block_{};
  std::uint64_t next_block_ = 0;
  unsigned lane_ = 4;
};

// Uniform integer in [0, n) by 128-bit multiply-shift. Slight modulo-free
// bias of less than 2^-64; irrelevant for pool indexing.
inline std::uint64_t bounded_u64(std::uint64_t raw, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(raw) * n) >> 64);
}

}  // namespace eggroll
