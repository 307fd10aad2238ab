#include "vsrag/keyframe.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include "vsrag/errors.hpp"

namespace vsrag {

void validate_bins(int bins_per_channel) {
  if (bins_per_channel < 2 || bins_per_channel > 256 || 256 % bins_per_channel != 0) {
    throw ConfigError("bins_per_channel must be >= 2 and divide 256, got " +
                      std::to_string(bins_per_channel));
  }
}

FrameHistogram compute_histogram(const Frame& frame, int bins_per_channel) {
  validate_bins(bins_per_channel);
  const std::size_t n = frame.pixel_count();
  if (n == 0 || frame.pixels.size() != n * 3) throw DataError("frame has no pixels");

  const int shift = [&] {
    int s = 0;
    while ((256 >> s) != bins_per_channel) ++s;
    return s;
  }();

  std::vector<std::size_t> counts(static_cast<std::size_t>(kHistogramChannels * bins_per_channel), 0);
  const std::uint8_t* px = frame.pixels.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < kHistogramChannels; ++c) {
      ++counts[static_cast<std::size_t>(c * bins_per_channel + (px[i * 3 + static_cast<std::size_t>(c)] >> shift))];
    }
  }

  FrameHistogram h{bins_per_channel, std::vector<double>(counts.size())};
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) h.bins[i] = static_cast<double>(counts[i]) * inv;
  return h;
}

double histogram_similarity(const FrameHistogram& a, const FrameHistogram& b) {
  if (a.bins_per_channel != b.bins_per_channel || a.bins.size() != b.bins.size() ||
      a.bins.size() != static_cast<std::size_t>(kHistogramChannels * a.bins_per_channel)) {
    throw ConfigError("histogram bin layouts differ");
  }
  double total = 0.0;
  for (int c = 0; c < kHistogramChannels; ++c) {
    const auto x = a.channel(c);
    const auto y = b.channel(c);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::min(x[i], y[i]);
    total += s;
  }
  return std::clamp(total / kHistogramChannels, 0.0, 1.0);
}

std::vector<FrameHistogram> compute_histograms(std::span<const Frame> frames, int bins_per_channel) {
  validate_bins(bins_per_channel);
  std::vector<FrameHistogram> out(frames.size());
  const auto n = static_cast<std::ptrdiff_t>(frames.size());
  // Exceptions must not escape the parallel region; record and rethrow after.
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = compute_histogram(frames[static_cast<std::size_t>(i)], bins_per_channel);
    } catch (...) {
#pragma omp critical(vsrag_histogram_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<std::size_t> keyframe_positions(std::span<const FrameHistogram> histograms,
                                            const KeyframeOptions& options) {
  if (histograms.empty()) throw DataError("cannot extract keyframes from an empty video");
  if (!(options.theta > 0.0 && options.theta <= 1.0)) {
    throw ConfigError("theta must lie in (0, 1], got " + std::to_string(options.theta));
  }
  std::vector<std::size_t> picked{0};
  for (std::size_t i = 1; i < histograms.size(); ++i) {
    const std::size_t ref =
        options.compare_to == KeyframeReference::previous_frame ? i - 1 : picked.back();
    if (histogram_similarity(histograms[i], histograms[ref]) < options.theta) picked.push_back(i);
  }
  return picked;
}

KeyframeSet extract_keyframes(std::span<const Frame> video, const KeyframeOptions& options) {
  if (video.empty()) throw DataError("cannot extract keyframes from an empty video");
  const auto histograms = compute_histograms(video, options.bins_per_channel);
  KeyframeSet set;
  set.source_frame_count = video.size();
  for (std::size_t pos : keyframe_positions(histograms, options)) set.frames.push_back(video[pos]);
  return set;
}

}  // namespace vsrag
