#include "vsrag/hash.hpp"

#include <array>

namespace vsrag {

namespace {
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}

Fnv1a& Fnv1a::update(std::string_view bytes) noexcept {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= kFnvPrime;
  }
  return *this;
}

Fnv1a& Fnv1a::update(std::span<const std::uint8_t> bytes) noexcept {
  for (std::uint8_t c : bytes) {
    state_ ^= c;
    state_ *= kFnvPrime;
  }
  return *this;
}

std::string Fnv1a::hex() const { return to_hex16(state_); }

std::uint64_t fnv1a(std::string_view bytes) noexcept { return Fnv1a{}.update(bytes).value(); }

std::string fnv1a_hex(std::string_view bytes) { return to_hex16(fnv1a(bytes)); }

std::string to_hex16(std::uint64_t v) {
  static constexpr std::array<char, 16> kDigits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                   '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t& state) noexcept {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(std::uint64_t& state, std::uint64_t n) noexcept {
  // Reject the tail so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t draw = splitmix64(state);
  while (draw >= limit) draw = splitmix64(state);
  return draw % n;
}

}  // namespace vsrag
