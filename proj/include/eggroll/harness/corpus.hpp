// Byte corpora for EGG training. Documents are separated by byte 0x00.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eggroll::harness {

std::vector<std::uint8_t> load_corpus(const std::string& path);

// Deterministic synthetic text: a small zipf-weighted vocabulary arranged
// into sentences and ~3 KB documents. Low byte entropy, so a byte-level
// model has plenty of structure to learn at desk scale.
std::vector<std::uint8_t> synthetic_corpus(std::uint64_t seed, std::size_t bytes);

}  // namespace eggroll::harness
