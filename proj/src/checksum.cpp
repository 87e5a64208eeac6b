#include "ordgen/checksum.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ordgen {

std::string checksum_hex(uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_checksum: cannot open " + path);
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
  return h.digest();
}

}  // namespace ordgen
