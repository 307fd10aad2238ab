#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsrag {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string base64_encode(std::string_view bytes);

/// Standard alphabet with padding; returns nullopt on any invalid character or length.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

}  // namespace vsrag
