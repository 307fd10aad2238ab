#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "vsrag/frame.hpp"

namespace vsrag {

inline constexpr std::string_view kPpmMediaType = "image/x-portable-pixmap";

/// Binary PPM (P6, maxval 255). Byte-stable, so digests of encoded frames are platform independent.
std::vector<std::uint8_t> encode_ppm(const Frame& frame);

/// Decodes P6/P3 PPM and, when built with libpng, PNG. Throws DataError on undecodable input.
Frame decode_image(std::span<const std::uint8_t> bytes, std::size_t index = 0);

bool png_supported() noexcept;

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Loads every supported image in `dir`, lexicographically ordered by filename. An optional
/// `frames.json` ({"frames": [{"file": ..., "timestamp_ms": ...}]}) supplies timestamps.
std::vector<Frame> load_frame_directory(const std::filesystem::path& dir);

}  // namespace vsrag
