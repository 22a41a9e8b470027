#include "mouthsyrinx/vision/pipeline.hpp"

namespace mouthsyrinx::vision {

void VisionConfig::validate() const {
  tracker.validate();
  thresholds.validate();
  if (mouth.k_down <= 0.0 || mouth.k_w <= 0.0 || mouth.k_h <= 0.0) {
    throw ConfigError("vision: mouth window constants must be positive");
  }
}

FrameAnalysis analyze_mouth(const Frame& frame, const NostrilGeometry& geometry,
                            const VisionConfig& config) {
  FrameAnalysis out;
  out.seq = frame.seq;
  const RotatedRegion region = mouth_window(geometry, config.mouth);
  const RgbImage sub = extract_rgb(frame.image, region);
  out.mask = vote_filter(segment_mouth(sub, config.thresholds));
  out.features = shape_features(largest_component(out.mask), geometry);
  out.mouth_region = region;
  return out;
}

VisionPipeline::VisionPipeline(VisionConfig config) : config_(std::move(config)) { config_.validate(); }

void VisionPipeline::set_thresholds(const SegmentationThresholds& thr) {
  thr.validate();
  config_.thresholds = thr;
}

FrameAnalysis VisionPipeline::initialize(const Frame& frame, std::optional<Point2> click) {
  state_.reset();
  TrackState st = vision::initialize(frame, config_.tracker, click);
  FrameAnalysis out = analyze_mouth(frame, st.geometry, config_);
  out.pair = st.pair;
  out.search_region = init_window(frame.width(), frame.height(), config_.tracker, click);
  state_ = std::move(st);
  return out;
}

FrameAnalysis VisionPipeline::process(const Frame& frame) {
  if (!state_) {
    FrameAnalysis lost;
    lost.seq = frame.seq;
    lost.lost = true;
    lost.lost_reason = "not initialized";
    return lost;
  }
  const RotatedRegion search = nostril_search_region(*state_, config_.tracker);
  try {
    TrackState next = track_step(frame, *state_, config_.tracker);
    FrameAnalysis out = analyze_mouth(frame, next.geometry, config_);
    out.pair = next.pair;
    out.search_region = search;
    state_ = std::move(next);
    return out;
  } catch (const TrackingLost& e) {
    FrameAnalysis lost;
    lost.seq = frame.seq;
    lost.lost = true;
    lost.lost_reason = e.what();
    lost.search_region = search;
    lost.features.c_n = state_->geometry.c_n;
    lost.features.a_n = state_->geometry.a_n;
    state_.reset();
    return lost;
  }
}

}  // namespace mouthsyrinx::vision
