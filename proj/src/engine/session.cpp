#include "mouthsyrinx/engine/session.hpp"

#include "mouthsyrinx/engine/wav.hpp"

namespace mouthsyrinx::engine {

LiveSession::LiveSession(EngineConfig config, Sink sink)
    : config_(std::move(config)), sink_(std::move(sink)), inbox_(config_.io.frame_queue), chain_(config_) {
  config_.validate();
  vision_thread_ = std::thread([this] { vision_loop(); });
  audio_thread_ = std::thread([this] { audio_loop(); });
}

LiveSession::~LiveSession() { stop(); }

void LiveSession::stop() {
  if (stopped_) return;
  stopped_ = true;
  inbox_.close();
  if (vision_thread_.joinable()) vision_thread_.join();
  mailbox_.close();
  if (audio_thread_.joinable()) audio_thread_.join();
}

void LiveSession::send_text(std::string text) {
  Outgoing out;
  out.text = std::move(text);
  sink_(std::move(out));
}

void LiveSession::handle_binary(std::span<const std::uint8_t> bytes) {
  vision::Frame frame;
  try {
    frame = decode_frame(bytes);
  } catch (const ProtocolError& e) {
    send_text(error_message(e.what()));
    return;
  }
  if (auto dropped = inbox_.push(std::move(frame), true)) {
    const auto seq = std::get<vision::Frame>(*dropped).seq;
    send_text(error_message("frame " + std::to_string(seq) + " dropped: vision queue full"));
  }
}

void LiveSession::handle_text(std::string_view text) {
  try {
    inbox_.push(parse_request(text), false);
  } catch (const ProtocolError& e) {
    send_text(error_message(e.what()));
  }
}

void LiveSession::vision_loop() {
  while (auto item = inbox_.pop()) {
    if (auto* frame = std::get_if<vision::Frame>(&*item)) {
      on_frame(std::move(*frame));
    } else {
      on_request(std::get<ClientRequest>(*item));
    }
  }
}

void LiveSession::on_frame(vision::Frame frame) {
  const auto seq = static_cast<std::uint32_t>(frame.seq);
  if (last_frame_ && frame.seq <= last_frame_->seq) {
    send_text(error_message("stale frame seq " + std::to_string(seq)));
    return;
  }
  try {
    frame.validate_for_tracking();
  } catch (const Error& e) {
    send_text(error_message(e.what()));
    return;
  }
  frame.timestamp = static_cast<double>(frame.seq) / config_.io.fps;

  const ChainStep step = chain_.process(frame);
  send_text(features_message(step.analysis, seq));
  Outgoing mask;
  mask.kind = Outgoing::Kind::mask;
  mask.bytes = encode_mask(step.analysis.mask, seq);
  sink_(std::move(mask));

  ++processed_;
  mailbox_.publish({processed_, seq, step.control.syrinx});
  feed_calibration(step, frame.timestamp);
  last_frame_ = std::move(frame);
}

void LiveSession::feed_calibration(const ChainStep& step, double time_s) {
  if (!calibration_) return;
  if (!calibration_->start) calibration_->start = time_s;
  if (!step.lost) calibration_->captured.push_back({time_s, step.analysis.features});
  if (time_s - *calibration_->start < calibration_->seconds) return;
  try {
    const auto cal = mapping::calibrate_capture(calibration_->captured, calibration_->seconds);
    chain_.mapper().set_calibration(cal);
    send_text(ack_message("calibrated from " + std::to_string(calibration_->captured.size()) + " frames"));
  } catch (const Error& e) {
    send_text(error_message(e.what()));
  }
  calibration_.reset();
}

void LiveSession::on_request(const ClientRequest& request) {
  try {
    if (const auto* init = std::get_if<InitRequest>(&request)) {
      if (!last_frame_) {
        send_text(error_message("no frame yet"));
        return;
      }
      chain_.initialize(*last_frame_, Point2{static_cast<double>(init->x), static_cast<double>(init->y)});
      send_text(ack_message("initialized"));
    } else if (const auto* thr = std::get_if<ThresholdsRequest>(&request)) {
      chain_.vision().set_thresholds(thr->thresholds);
      send_text(ack_message("thresholds updated"));
    } else if (const auto* route = std::get_if<RouteRequest>(&request)) {
      chain_.mapper().set_route(route->route);
      send_text(ack_message("route updated"));
    } else if (const auto* cal = std::get_if<CalibrateRequest>(&request)) {
      if (calibration_) {
        send_text(error_message("calibration already running"));
        return;
      }
      // Answered once the capture window has elapsed in frame time.
      calibration_ = Calibration{cal->seconds, std::nullopt, {}};
    }
  } catch (const Error& e) {
    send_text(error_message(e.what()));
  }
}

void LiveSession::audio_loop() {
  AudioRenderer renderer(config_);
  std::uint64_t seen = 0;
  std::uint64_t rendered = 0;
  std::vector<double> samples;
  std::vector<std::int16_t> pcm;
  while (auto latest = mailbox_.wait_newer(seen)) {
    seen = latest->first;
    const AudioTick& tick = latest->second;
    std::size_t n = 0;
    for (std::uint64_t k = rendered; k < tick.frames; ++k) {
      n += streaming_sample_count(k, config_.io.sample_rate, config_.io.fps);
    }
    rendered = tick.frames;
    samples.clear();
    renderer.render(tick.controls, n, samples);
    pcm.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) pcm[i] = to_pcm16(samples[i]);
    Outgoing out;
    out.kind = Outgoing::Kind::audio;
    out.bytes = encode_pcm(pcm, tick.seq);
    sink_(std::move(out));
  }
}

}  // namespace mouthsyrinx::engine
