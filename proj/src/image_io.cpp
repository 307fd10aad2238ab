#include "vsrag/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "vsrag/errors.hpp"

#ifdef VSRAG_HAVE_PNG
#include <png.h>
#endif

namespace vsrag {

Frame make_frame(std::size_t index, int width, int height, std::vector<std::uint8_t> pixels,
                 std::optional<std::int64_t> timestamp_ms) {
  if (width < 1 || height < 1) throw DataError("frame dimensions must be at least 1x1");
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (pixels.size() != expected) {
    throw DataError("frame pixel buffer has " + std::to_string(pixels.size()) +
                    " bytes, expected " + std::to_string(expected));
  }
  return Frame{index, width, height, std::move(pixels), timestamp_ms};
}

Frame solid_frame(std::size_t index, int width, int height, std::uint8_t r, std::uint8_t g,
                  std::uint8_t b) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < px.size(); i += 3) {
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  return make_frame(index, width, height, std::move(px));
}

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
  const std::string header =
      "P6\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Next whitespace-delimited header token, skipping '#' comments.
  std::string token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(static_cast<char>(bytes_[pos_++]));
    if (out.empty()) throw DataError("truncated PPM header");
    return out;
  }

  int number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        t.size() > 9) {
      throw DataError("invalid PPM number '" + t + "'");
    }
    return std::stoi(t);
  }

  void skip_single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw DataError("malformed PPM header");
    ++pos_;
  }

  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Frame decode_ppm(std::span<const std::uint8_t> bytes, std::size_t index) {
  PnmReader reader(bytes);
  const std::string magic = reader.token();
  if (magic != "P6" && magic != "P3") throw DataError("unsupported PNM variant " + magic);
  const int width = reader.number();
  const int height = reader.number();
  const int maxval = reader.number();
  if (width < 1 || height < 1) throw DataError("PPM dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw DataError("only 8-bit PPM is supported");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  std::vector<std::uint8_t> px(n);
  if (magic == "P6") {
    reader.skip_single_whitespace();
    const auto data = reader.rest();
    if (data.size() < n) throw DataError("truncated PPM pixel data");
    std::copy_n(data.begin(), n, px.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) px[i] = static_cast<std::uint8_t>(reader.number());
  }
  if (maxval != 255) {
    for (auto& v : px) v = static_cast<std::uint8_t>(std::min(255, v * 255 / maxval));
  }
  return make_frame(index, width, height, std::move(px));
}

#ifdef VSRAG_HAVE_PNG
Frame decode_png(std::span<const std::uint8_t> bytes, std::size_t index) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError(std::string("PNG decode failed: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError(std::string("PNG decode failed: ") + image.message);
  }
  return make_frame(index, static_cast<int>(image.width), static_cast<int>(image.height), std::move(px));
}
#endif

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(std::begin(kSig), std::end(kSig), bytes.begin());
}

bool supported_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm" || ext == ".pnm") return true;
  return ext == ".png" && png_supported();
}

}  // namespace

Frame decode_image(std::span<const std::uint8_t> bytes, std::size_t index) {
  if (is_png(bytes)) {
#ifdef VSRAG_HAVE_PNG
    return decode_png(bytes, index);
#else
    throw DataError("PNG support not compiled in");
#endif
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_ppm(bytes, index);
  throw DataError("unrecognized image format");
}

bool png_supported() noexcept {
#ifdef VSRAG_HAVE_PNG
  return true;
#else
  return false;
#endif
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<Frame> load_frame_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("frame directory not found: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && supported_extension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  std::map<std::string, std::int64_t> timestamps;
  const fs::path mapping = dir / "frames.json";
  if (fs::exists(mapping)) {
    std::ifstream in(mapping);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("frames") || !doc["frames"].is_array()) {
      throw DataError("invalid frames.json in " + dir.string());
    }
    for (const auto& f : doc["frames"]) {
      if (f.contains("file") && f.contains("timestamp_ms")) {
        timestamps[f["file"].get<std::string>()] = f["timestamp_ms"].get<std::int64_t>();
      }
    }
  }

  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame f = decode_image(read_file_bytes(files[i]), i);
    if (auto it = timestamps.find(files[i].filename().string()); it != timestamps.end()) {
      f.timestamp_ms = it->second;
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace vsrag
