#include "tsim/cachemem.hpp"

#include <string>

#include "tsim/errors.hpp"

namespace tsim {

std::ostream& operator<<(std::ostream& os, const ValueToken& token) {
  if (token.is_initial()) return os << "init@" << token.seq;
  return os << 'c' << token.writer << '#' << token.seq << '=' << token.data;
}

char to_char(L1State state) {
  switch (state) {
    case L1State::I:
      return 'I';
    case L1State::S:
      return 'S';
    case L1State::E:
      return 'E';
    case L1State::M:
      return 'M';
  }
  return '?';
}

MemEntry MainMemory::read(Addr addr) const {
  if (auto it = entries_.find(addr); it != entries_.end()) return it->second;
  return MemEntry{ValueToken::initial(addr), Timestamp{0}, Timestamp{0}, 0};
}

void MainMemory::append_key(std::string& out) const {
  for (const auto& [addr, e] : entries_) {
    out += std::to_string(addr) + ':' + std::to_string(e.value.writer) + '.' + std::to_string(e.value.seq) + '.' +
           std::to_string(e.value.data) + '.' + std::to_string(e.wts.value) + '.' + std::to_string(e.rts.value) + '.' + std::to_string(e.cur_lease) + ';';
  }
}

void CacheGeometry::validate() const {
  auto check = [this](const char* name, std::uint32_t kb, std::uint32_t ways) {
    if (kb == 0 || ways == 0) throw ConfigError(std::string(name) + ": size and ways must be positive");
    const std::uint64_t lines = static_cast<std::uint64_t>(kb) * 1024 / line_bytes;
    if (lines == 0 || lines % ways != 0)
      throw ConfigError(std::string(name) + ": " + std::to_string(kb) + " KB does not divide into " +
                        std::to_string(ways) + "-way sets of " + std::to_string(line_bytes) + " B lines");
  };
  if (line_bytes == 0 || line_bytes % 16 != 0) throw ConfigError("line_bytes must be a positive multiple of 16");
  check("l1", l1_kb, l1_ways);
  check("llc", llc_kb, llc_ways);
}

}  // namespace tsim
