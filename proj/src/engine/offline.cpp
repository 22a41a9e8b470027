#include "mouthsyrinx/engine/offline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mouthsyrinx::engine {

namespace {

void check_rates(double sample_rate, double fps) {
  if (!(sample_rate > 0.0) || !(fps > 0.0)) throw ConfigError("sample_rate and fps must be positive");
}

}  // namespace

std::vector<std::size_t> frame_sample_counts(std::size_t n_frames, double sample_rate, double fps) {
  check_rates(sample_rate, fps);
  const double quota = sample_rate / fps;
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(n_frames) * quota));
  const auto base = static_cast<std::size_t>(std::floor(quota));
  std::vector<std::size_t> counts(n_frames, base);
  // Every frame has the same quota, so the remainders tie and the leftover
  // samples go to the earliest frames.
  std::size_t leftover = total - std::min(total, base * n_frames);
  for (std::size_t i = 0; i < n_frames && leftover > 0; ++i, --leftover) ++counts[i];
  return counts;
}

std::size_t streaming_sample_count(std::uint64_t k, double sample_rate, double fps) {
  check_rates(sample_rate, fps);
  const double quota = sample_rate / fps;
  return static_cast<std::size_t>(std::llround(static_cast<double>(k + 1) * quota) -
                                  std::llround(static_cast<double>(k) * quota));
}

syrinx::SyrinxControls silent_controls(const syrinx::SyrinxControls& defaults) {
  syrinx::SyrinxControls c = defaults;
  c.p_lung = 0.0;
  return c;
}

ControlChain::ControlChain(const EngineConfig& config)
    : vision_(config.vision),
      mapper_(config.mapping.routes, config.mapping.calibration, config.controls) {
  held_.syrinx = silent_controls(config.controls);
}

ChainStep ControlChain::mapped(vision::FrameAnalysis analysis, const vision::Frame& frame) {
  ChainStep step;
  step.control = mapper_.map(analysis.features, frame.seq, frame.timestamp);
  step.analysis = std::move(analysis);
  held_ = step.control;
  return step;
}

ChainStep ControlChain::lost(vision::FrameAnalysis analysis, const vision::Frame& frame) {
  ChainStep step;
  step.analysis = std::move(analysis);
  step.analysis.lost = true;
  step.lost = true;
  step.control = held_;
  step.control.seq = frame.seq;
  step.control.time_s = frame.timestamp;
  return step;
}

ChainStep ControlChain::initialize(const vision::Frame& frame, std::optional<Point2> click) {
  vision::FrameAnalysis analysis;
  try {
    analysis = vision_.initialize(frame, click);
  } catch (const vision::NostrilsNotFound& e) {
    throw InitFailed(std::string("initialization failed: ") + e.what());
  } catch (const vision::DegeneratePair& e) {
    throw InitFailed(std::string("initialization failed: ") + e.what());
  }
  click_ = click;
  initialized_ = true;
  return mapped(std::move(analysis), frame);
}

ChainStep ControlChain::process(const vision::Frame& frame) {
  if (!initialized_) {
    vision::FrameAnalysis none;
    none.seq = frame.seq;
    none.lost_reason = "not initialized";
    return lost(std::move(none), frame);
  }
  if (vision_.locked()) {
    vision::FrameAnalysis analysis = vision_.process(frame);
    if (analysis.lost) return lost(std::move(analysis), frame);
    return mapped(std::move(analysis), frame);
  }
  try {
    return mapped(vision_.initialize(frame, click_), frame);
  } catch (const vision::NostrilsNotFound& e) {
    vision::FrameAnalysis none;
    none.seq = frame.seq;
    none.lost_reason = e.what();
    return lost(std::move(none), frame);
  } catch (const vision::DegeneratePair& e) {
    vision::FrameAnalysis none;
    none.seq = frame.seq;
    none.lost_reason = e.what();
    return lost(std::move(none), frame);
  }
}

AudioRenderer::AudioRenderer(const EngineConfig& config)
    : synth_(config.synth_config(), silent_controls(config.controls)) {}

void AudioRenderer::render(const syrinx::SyrinxControls& controls, std::size_t n, std::vector<double>& out) {
  const std::size_t start = out.size();
  out.resize(start + n);
  synth_.process_block(controls, std::span<double>(out).subspan(start, n));
}

OfflineResult run_offline(const EngineConfig& config, std::span<const vision::Frame> frames,
                          std::optional<Point2> click) {
  if (frames.empty()) throw ConfigError("no frames to render");
  config.validate();
  const auto counts = frame_sample_counts(frames.size(), config.io.sample_rate, config.io.fps);

  ControlChain chain(config);
  AudioRenderer audio(config);
  OfflineResult result;
  result.samples.reserve(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  result.rows.reserve(frames.size());

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const ChainStep step = i == 0 ? chain.initialize(frames[0], click) : chain.process(frames[i]);
    if (step.lost) ++result.lost_frames;
    result.rows.push_back(make_row(step.analysis.features, step.control, step.lost));
    audio.render(step.control.syrinx, counts[i], result.samples);
  }
  result.blowups = audio.blowups();
  return result;
}

}  // namespace mouthsyrinx::engine
