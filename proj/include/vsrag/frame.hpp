#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace vsrag {

/// One decoded video frame: 8-bit RGB, row-major, interleaved.
struct Frame {
  std::size_t index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::optional<std::int64_t> timestamp_ms;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

/// Builds a frame, validating dimensions against the pixel buffer. Throws DataError.
Frame make_frame(std::size_t index, int width, int height, std::vector<std::uint8_t> pixels,
                 std::optional<std::int64_t> timestamp_ms = std::nullopt);

/// Frame filled with a single RGB color.
Frame solid_frame(std::size_t index, int width, int height, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b);

}  // namespace vsrag
