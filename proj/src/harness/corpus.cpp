#include "eggroll/harness/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include "eggroll/prng_core.hpp"

namespace eggroll::harness {

std::vector<std::uint8_t> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("corpus: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.empty()) throw std::runtime_error("corpus: " + path + " is empty");
  return bytes;
}

std::vector<std::uint8_t> synthetic_corpus(std::uint64_t seed, std::size_t bytes) {
  static const char* kWords[] = {
      "the",   "egg",    "roll",  "of",     "a",      "to",    "and",  "in",
      "rank",  "one",    "noise", "low",    "update", "mean",  "fit",  "step",
      "score", "matrix", "net",   "weight", "state",  "gate",  "byte", "token",
      "seed",  "pair",   "sign",  "train",  "loss",   "model", "data", "batch"};
  constexpr int kNumWords = 32;
  // Zipf-ish weights: word k with weight ~ 1/(k+1).
  std::uint32_t weights[kNumWords];
  std::uint32_t total = 0;
  for (int k = 0; k < kNumWords; ++k) {
    weights[k] = 1000 / static_cast<std::uint32_t>(k + 1);
    total += weights[k];
  }

  const StreamKey key = derive_stream(seed, 0, 0, 0, StreamTag::Data);
  U64Stream stream(key);
  auto pick_word = [&]() {
    std::uint32_t x = static_cast<std::uint32_t>(bounded_u64(stream.next(), total));
    for (int k = 0; k < kNumWords; ++k) {
      if (x < weights[k]) return k;
      x -= weights[k];
    }
    return kNumWords - 1;
  };

  std::vector<std::uint8_t> out;
  out.reserve(bytes);
  std::size_t doc_len = 0;
  std::size_t sentence_words = 0;
  std::size_t sentence_target = 4 + bounded_u64(stream.next(), 7);
  while (out.size() < bytes) {
    const char* w = kWords[pick_word()];
    for (const char* c = w; *c; ++c) out.push_back(static_cast<std::uint8_t>(*c));
    ++sentence_words;
    ++doc_len;
    if (sentence_words >= sentence_target) {
      out.push_back('.');
      sentence_words = 0;
      sentence_target = 4 + bounded_u64(stream.next(), 7);
      if (doc_len >= 512) {  // ~3 KB documents
        out.push_back('\n');
        out.push_back(0);  // document separator
        doc_len = 0;
        continue;
      }
    }
    out.push_back(' ');
  }
  out.resize(bytes);
  return out;
}

}  // namespace eggroll::harness
