#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mouthsyrinx/engine/config.hpp"
#include "mouthsyrinx/engine/control_log.hpp"
#include "mouthsyrinx/syrinx/model.hpp"
#include "mouthsyrinx/vision/pipeline.hpp"

namespace mouthsyrinx::engine {

class InitFailed : public Error {
 public:
  using Error::Error;
};

// Samples per frame by the largest-remainder method: the total is
// round(n * sample_rate / fps) and every frame gets floor or ceil of the
// exact quota. Equal remainders go to the earlier frames.
std::vector<std::size_t> frame_sample_counts(std::size_t n_frames, double sample_rate, double fps);

// Streaming form used when the frame count is unknown: frame k gets
// round((k+1) q) - round(k q) samples, q = sample_rate / fps. Agrees with
// frame_sample_counts whenever q is an integer.
std::size_t streaming_sample_count(std::uint64_t k, double sample_rate, double fps);

// Controls in force before the first lock: config defaults with the lung
// pressure at zero, so the instrument is silent.
syrinx::SyrinxControls silent_controls(const syrinx::SyrinxControls& defaults);

struct ChainStep {
  vision::FrameAnalysis analysis;
  mapping::ControlFrame control;
  bool lost = false;
};

// Vision followed by mapping. After a tracking loss the last control frame is
// held and every following frame retries initialization at the original
// click (or the automatic init window).
class ControlChain {
 public:
  explicit ControlChain(const EngineConfig& config);

  // Throws InitFailed when the nostrils are not found.
  ChainStep initialize(const vision::Frame& frame, std::optional<Point2> click = std::nullopt);
  // Before the first successful initialize every frame is reported lost.
  ChainStep process(const vision::Frame& frame);

  bool locked() const { return vision_.locked(); }
  bool initialized() const { return initialized_; }
  vision::VisionPipeline& vision() { return vision_; }
  mapping::Mapper& mapper() { return mapper_; }
  const mapping::ControlFrame& held() const { return held_; }

 private:
  ChainStep mapped(vision::FrameAnalysis analysis, const vision::Frame& frame);
  ChainStep lost(vision::FrameAnalysis analysis, const vision::Frame& frame);

  vision::VisionPipeline vision_;
  mapping::Mapper mapper_;
  mapping::ControlFrame held_;
  std::optional<Point2> click_;
  bool initialized_ = false;
};

// Syrinx driven by control frames held for a given number of samples.
class AudioRenderer {
 public:
  explicit AudioRenderer(const EngineConfig& config);

  void render(const syrinx::SyrinxControls& controls, std::size_t n, std::vector<double>& out);
  std::size_t blowups() const { return synth_.blowup_count(); }
  const syrinx::Syrinx& synth() const { return synth_; }

 private:
  syrinx::Syrinx synth_;
};

struct OfflineResult {
  std::vector<double> samples;
  std::vector<ControlLogRow> rows;
  std::size_t lost_frames = 0;
  std::size_t blowups = 0;
};

// Initializes on frame 0 (at `click` when given), then tracks, maps and
// renders every frame. Single-threaded and deterministic.
OfflineResult run_offline(const EngineConfig& config, std::span<const vision::Frame> frames,
                          std::optional<Point2> click = std::nullopt);

}  // namespace mouthsyrinx::engine
