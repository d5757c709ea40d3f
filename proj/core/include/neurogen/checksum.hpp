#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "neurogen/matrix.hpp"

namespace neurogen {

/// 64-bit FNV-1a, used for freeze checks and dataset manifests.
class Fnv1a {
 public:
  void update(const void* data, std::size_t len) noexcept;
  void update(std::string_view s) noexcept { update(s.data(), s.size()); }
  void update(const Matrix& m) noexcept;
  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);
std::uint64_t checksum_parameters(std::span<const Parameter* const> params);
std::string checksum_file(const std::filesystem::path& path);

}  // namespace neurogen
