#include "ordgen/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ordgen/checksum.hpp"

namespace ordgen {

namespace {

constexpr char kMagic[4] = {'O', 'G', 'C', 'P'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void Checkpoint::add(const std::string& name, const Tensor& t) {
  arrays_.emplace_back(name, t);
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& [n, t] : arrays_) {
    if (n == name) return t;
  }
  throw CheckpointError("checkpoint has no array named '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, t] : arrays_) {
    if (n == name) return true;
  }
  return false;
}

std::string Checkpoint::kind() const {
  return meta.value("kind", std::string("unknown"));
}

uint64_t Checkpoint::vocab_checksum() const {
  const std::string hex = meta.value("vocab_checksum", std::string());
  return hex.empty() ? 0 : std::stoull(hex, nullptr, 16);
}

uint64_t Checkpoint::params_checksum() const {
  Fnv1a h;
  for (const auto& [name, t] : arrays_) {
    h.update(name);
    for (size_t d : t.shape) h.update_u64(d);
    h.update(t.values);
  }
  return h.digest();
}

void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint: " + tmp);
    out.write(kMagic, sizeof(kMagic));
    write_pod<uint32_t>(out, kVersion);
    const std::string meta_str = meta.dump();
    write_pod<uint64_t>(out, meta_str.size());
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(arrays_.size()));
    for (const auto& [name, t] : arrays_) {
      write_pod<uint32_t>(out, static_cast<uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_pod<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
      for (size_t d : t.shape) write_pod<uint64_t>(out, d);
      out.write(reinterpret_cast<const char*>(t.values.data()),
                static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    }
    if (!out) throw CheckpointError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  const auto version = read_pod<uint32_t>(in, path);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) +
                          " in " + path);
  }
  const auto meta_len = read_pod<uint64_t>(in, path);
  std::string meta_str(meta_len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
  if (!in) throw CheckpointError("truncated checkpoint: " + path);
  Checkpoint ck;
  try {
    ck.meta = nlohmann::json::parse(meta_str);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("bad checkpoint metadata in " + path + ": " + e.what());
  }
  const auto n_arrays = read_pod<uint32_t>(in, path);
  for (uint32_t i = 0; i < n_arrays; ++i) {
    const auto name_len = read_pod<uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = read_pod<uint32_t>(in, path);
    std::vector<size_t> shape(rank);
    for (auto& d : shape) d = static_cast<size_t>(read_pod<uint64_t>(in, path));
    Tensor t = Tensor::zeros(shape);
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!in) throw CheckpointError("truncated checkpoint: " + path);
    ck.arrays_.emplace_back(std::move(name), std::move(t));
  }
  return ck;
}

}  // namespace ordgen
