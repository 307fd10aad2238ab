#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsrag/frame.hpp"

namespace vsrag {

inline constexpr int kHistogramChannels = 3;

/// Per-channel normalized intensity histogram: three concatenated blocks (R, G, B),
/// each of `bins_per_channel` entries summing to 1.
struct FrameHistogram {
  int bins_per_channel = 0;
  std::vector<double> bins;

  std::span<const double> channel(int c) const {
    return std::span<const double>(bins).subspan(static_cast<std::size_t>(c * bins_per_channel),
                                                 static_cast<std::size_t>(bins_per_channel));
  }
};

/// Which frame a candidate is compared against when deciding keyframe membership.
enum class KeyframeReference {
  previous_frame,     ///< immediate predecessor in the source video (default)
  previous_keyframe,  ///< last frame admitted to the keyframe set
};

struct KeyframeOptions {
  double theta = 0.85;
  int bins_per_channel = 64;
  KeyframeReference compare_to = KeyframeReference::previous_frame;
};

/// Keyframes in source order. Holds copies so the set outlives the decoded video.
struct KeyframeSet {
  std::vector<Frame> frames;
  std::size_t source_frame_count = 0;

  bool empty() const noexcept { return frames.empty(); }
  std::size_t size() const noexcept { return frames.size(); }
};

/// Throws ConfigError unless bins_per_channel >= 2 and divides 256.
void validate_bins(int bins_per_channel);

FrameHistogram compute_histogram(const Frame& frame, int bins_per_channel);

/// Histogram intersection averaged over channels, in [0, 1]. Throws ConfigError on layout mismatch.
double histogram_similarity(const FrameHistogram& a, const FrameHistogram& b);

/// Histograms for every frame; frames are processed in parallel (OpenMP).
std::vector<FrameHistogram> compute_histograms(std::span<const Frame> frames, int bins_per_channel);

/// Frame 0 always, then each frame whose similarity to its reference falls below theta.
/// Throws DataError on an empty video, ConfigError on bad options.
KeyframeSet extract_keyframes(std::span<const Frame> video, const KeyframeOptions& options = {});

/// Same decision rule, returned as positions into `video`. Exposed for property tests.
std::vector<std::size_t> keyframe_positions(std::span<const FrameHistogram> histograms,
                                            const KeyframeOptions& options);

/// Serial implementations kept as the reference for the parallel kernels.
namespace reference {
std::vector<FrameHistogram> compute_histograms_serial(std::span<const Frame> frames, int bins_per_channel);
KeyframeSet extract_keyframes_serial(std::span<const Frame> video, const KeyframeOptions& options);
}  // namespace reference

}  // namespace vsrag
