#pragma once

#include <optional>
#include <string>

#include "mouthsyrinx/vision/mouth.hpp"
#include "mouthsyrinx/vision/tracker.hpp"

namespace mouthsyrinx::vision {

struct VisionConfig {
  TrackerParams tracker;
  MouthWindowParams mouth;
  SegmentationThresholds thresholds;

  void validate() const;
  friend bool operator==(const VisionConfig&, const VisionConfig&) = default;
};

struct FrameAnalysis {
  std::uint64_t seq = 0;
  bool lost = false;
  std::string lost_reason;
  MouthFeatures features;                // zero when lost
  std::optional<NostrilPair> pair;
  std::optional<RotatedRegion> search_region;
  std::optional<RotatedRegion> mouth_region;
  BinaryMask mask;                       // voted mask in mouth-window space
};

// Mouth features from one frame given a nostril geometry.
FrameAnalysis analyze_mouth(const Frame& frame, const NostrilGeometry& geometry,
                            const VisionConfig& config);

// Stateful wrapper: initialize once, then process frames in order.
class VisionPipeline {
 public:
  explicit VisionPipeline(VisionConfig config);

  // Throws NostrilsNotFound if the init window does not show the nostrils.
  FrameAnalysis initialize(const Frame& frame, std::optional<Point2> click = std::nullopt);
  // Tracks and analyzes one frame. On tracking loss the result is marked
  // lost and the pipeline must be re-initialized.
  FrameAnalysis process(const Frame& frame);

  bool locked() const { return state_.has_value(); }
  const std::optional<TrackState>& state() const { return state_; }
  const VisionConfig& config() const { return config_; }
  void set_thresholds(const SegmentationThresholds& thr);
  void reset() { state_.reset(); }

 private:
  VisionConfig config_;
  std::optional<TrackState> state_;
};

}  // namespace mouthsyrinx::vision
