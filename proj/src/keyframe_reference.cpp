#include <algorithm>

#include "vsrag/errors.hpp"
#include "vsrag/keyframe.hpp"

namespace vsrag::reference {

std::vector<FrameHistogram> compute_histograms_serial(std::span<const Frame> frames, int bins_per_channel) {
  std::vector<FrameHistogram> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(compute_histogram(f, bins_per_channel));
  return out;
}

KeyframeSet extract_keyframes_serial(std::span<const Frame> video, const KeyframeOptions& options) {
  if (video.empty()) throw DataError("cannot extract keyframes from an empty video");
  if (!(options.theta > 0.0 && options.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  KeyframeSet set;
  set.source_frame_count = video.size();
  set.frames.push_back(video[0]);
  FrameHistogram reference = compute_histogram(video[0], options.bins_per_channel);
  for (std::size_t i = 1; i < video.size(); ++i) {
    FrameHistogram current = compute_histogram(video[i], options.bins_per_channel);
    const bool admit = histogram_similarity(current, reference) < options.theta;
    if (admit) set.frames.push_back(video[i]);
    if (admit || options.compare_to == KeyframeReference::previous_frame) reference = std::move(current);
  }
  return set;
}

}  // namespace vsrag::reference
