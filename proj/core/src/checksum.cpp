#include "neurogen/checksum.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "neurogen/errors.hpp"

namespace neurogen {

void Fnv1a::update(const void* data, std::size_t len) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update(const Matrix& m) noexcept {
  const std::uint64_t dims[2] = {m.rows(), m.cols()};
  update(dims, sizeof(dims));
  update(m.data(), m.size() * sizeof(double));
}

std::string to_hex(std::uint64_t v) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf.data());
}

std::string Fnv1a::hex() const { return to_hex(state_); }

std::uint64_t checksum_parameters(std::span<const Parameter* const> params) {
  Fnv1a h;
  for (const Parameter* p : params) {
    h.update(p->name);
    h.update(p->value);
  }
  return h.digest();
}

std::string checksum_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for checksum");
  Fnv1a h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

}  // namespace neurogen
