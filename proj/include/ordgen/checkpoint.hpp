#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ordgen/tensor.hpp"

namespace ordgen {

// Thrown for unreadable/incompatible checkpoints; the CLI maps it to exit
// code 3.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Versioned container of named float arrays plus JSON metadata (kind, dims,
// vocab checksum, config, seed). Serialization is byte-deterministic: raw
// little-endian float64 payloads, metadata dumped with sorted keys.
class Checkpoint {
 public:
  static constexpr uint32_t kVersion = 1;

  nlohmann::json meta;

  void add(const std::string& name, const Tensor& t);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& arrays() const { return arrays_; }

  std::string kind() const;
  uint64_t vocab_checksum() const;

  // Checksum over array names, shapes and values (not the metadata).
  uint64_t params_checksum() const;

  // Atomic: writes path + ".tmp" then renames.
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::vector<std::pair<std::string, Tensor>> arrays_;
};

}  // namespace ordgen
