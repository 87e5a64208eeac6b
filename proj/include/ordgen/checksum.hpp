#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace ordgen {

// FNV-1a 64-bit, used for vocab/parameter/file checksums.
class Fnv1a {
 public:
  void update(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  void update(const std::vector<double>& v) { update(v.data(), v.size() * sizeof(double)); }
  void update_u64(uint64_t x) { update(&x, sizeof(x)); }
  uint64_t digest() const { return hash_; }

 private:
  uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string checksum_hex(uint64_t h);
uint64_t file_checksum(const std::string& path);

}  // namespace ordgen
