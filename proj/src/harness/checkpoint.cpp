#include "eggroll/harness/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace eggroll::harness {

namespace {

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw std::runtime_error("checkpoint: truncated file");
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  write_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  read_bytes(in, &v, sizeof(T));
  return v;
}

void write_block(std::ofstream& out, const std::vector<std::int8_t>& v) {
  write_bytes(out, v.data(), v.size());
}

void read_block(std::ifstream& in, std::vector<std::int8_t>& v) {
  read_bytes(in, v.data(), v.size());
}

}  // namespace

void save_es_checkpoint(const std::string& path, const EsCheckpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  write_bytes(out, "ESCK", 4);
  write_pod<std::uint32_t>(out, 1);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ck.mu.size()));
  for (const auto& m : ck.mu) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  }
  write_pod<std::uint64_t>(out, ck.t);
  write_pod<float>(out, ck.sigma_t);
  write_pod<float>(out, ck.alpha_t);
  write_pod<std::uint64_t>(out, ck.master_seed);
  for (const auto& m : ck.mu)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod<float>(out, m(r, c));
}

EsCheckpoint load_es_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, "ESCK", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic (expected ESCK)");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != 1)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto count = read_pod<std::uint32_t>(in);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(count);
  for (auto& d : dims) {
    d.first = read_pod<std::uint32_t>(in);
    d.second = read_pod<std::uint32_t>(in);
  }
  EsCheckpoint ck;
  ck.t = read_pod<std::uint64_t>(in);
  ck.sigma_t = read_pod<float>(in);
  ck.alpha_t = read_pod<float>(in);
  ck.master_seed = read_pod<std::uint64_t>(in);
  ck.mu.reserve(count);
  for (const auto& d : dims) {
    MatrixF m(d.first, d.second);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_pod<float>(in);
    ck.mu.push_back(std::move(m));
  }
  return ck;
}

void save_egg_checkpoint(const std::string& path, const EggCheckpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
  write_bytes(out, "EGG1", 4);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ck.params.dims.layers));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ck.params.dims.log4_dim));
  write_pod<std::uint64_t>(out, ck.master_seed);
  write_pod<std::uint64_t>(out, ck.step);
  write_block(out, ck.params.emb);
  write_block(out, ck.params.head);
  write_block(out, ck.params.lnout);
  for (const auto& L : ck.params.layers) {
    write_block(out, L.ln1);
    write_block(out, L.ln2);
    write_block(out, L.mlp1);
    write_block(out, L.mlp2);
    write_block(out, L.wf);
    write_block(out, L.uf);
    write_block(out, L.wh);
    write_block(out, L.uh);
    write_block(out, L.bf);
    write_block(out, L.bh);
  }
}

EggCheckpoint load_egg_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, "EGG1", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic (expected EGG1)");
  EggCheckpoint ck;
  egg::EggDims dims;
  dims.layers = static_cast<int>(read_pod<std::uint32_t>(in));
  dims.log4_dim = static_cast<int>(read_pod<std::uint32_t>(in));
  ck.master_seed = read_pod<std::uint64_t>(in);
  ck.step = read_pod<std::uint64_t>(in);

  const std::size_t d = static_cast<std::size_t>(dims.dim());
  ck.params.dims = dims;
  ck.params.emb.resize(static_cast<std::size_t>(egg::kVocab) * d);
  ck.params.head.resize(static_cast<std::size_t>(egg::kVocab) * d);
  ck.params.lnout.resize(d);
  read_block(in, ck.params.emb);
  read_block(in, ck.params.head);
  read_block(in, ck.params.lnout);
  ck.params.layers.resize(static_cast<std::size_t>(dims.layers));
  for (auto& L : ck.params.layers) {
    L.ln1.resize(d);
    L.ln2.resize(d);
    L.mlp1.resize(4 * d * d);
    L.mlp2.resize(d * 4 * d);
    L.wf.resize(d * d);
    L.uf.resize(d * d);
    L.wh.resize(d * d);
    L.uh.resize(d * d);
    L.bf.resize(d);
    L.bh.resize(d);
    read_block(in, L.ln1);
    read_block(in, L.ln2);
    read_block(in, L.mlp1);
    read_block(in, L.mlp2);
    read_block(in, L.wf);
    read_block(in, L.uf);
    read_block(in, L.wh);
    read_block(in, L.uh);
    read_block(in, L.bf);
    read_block(in, L.bh);
  }
  return ck;
}

}  // namespace eggroll::harness
