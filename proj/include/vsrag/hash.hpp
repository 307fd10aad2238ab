#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace vsrag {

/// 64-bit FNV-1a. Stable across platforms; used for fixture keys and digests.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) noexcept;
  Fnv1a& update(std::span<const std::uint8_t> bytes) noexcept;
  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::string fnv1a_hex(std::string_view bytes);
std::string to_hex16(std::uint64_t v);

/// splitmix64 step; a portable seeded stream for the mock backend.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Uniform double in [0, 1) from 53 high bits of a splitmix64 draw.
double unit_double(std::uint64_t& state) noexcept;

/// Unbiased integer in [0, n) via rejection on a splitmix64 stream. n must be > 0.
std::uint64_t uniform_index(std::uint64_t& state, std::uint64_t n) noexcept;

}  // namespace vsrag
