#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "mouthsyrinx/engine/config.hpp"
#include "mouthsyrinx/engine/offline.hpp"
#include "mouthsyrinx/engine/protocol.hpp"
#include "mouthsyrinx/engine/queues.hpp"

namespace mouthsyrinx::engine {

struct Outgoing {
  enum class Kind { text, mask, audio };
  Kind kind = Kind::text;
  std::string text;
  std::vector<std::uint8_t> bytes;

  bool binary() const { return kind != Kind::text; }
};

// One client's live engine: a vision worker fed by a FIFO of frames and
// commands, and an audio worker fed by a latest-value mailbox. Every frame is
// answered by a features message (plus an MSK0 overlay) or an error; every
// command by one ack or error. The sink is called from the caller's thread
// and from both workers.
class LiveSession {
 public:
  using Sink = std::function<void(Outgoing)>;

  LiveSession(EngineConfig config, Sink sink);
  ~LiveSession();
  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  void handle_binary(std::span<const std::uint8_t> bytes);
  void handle_text(std::string_view text);
  // Drains nothing further; joins both workers. Idempotent.
  void stop();

 private:
  struct AudioTick {
    std::uint64_t frames = 0;  // frames processed so far
    std::uint32_t seq = 0;     // seq of the newest one
    syrinx::SyrinxControls controls;
  };
  struct Calibration {
    double seconds = 0.0;
    std::optional<double> start;
    std::vector<mapping::TimedFeatures> captured;
  };
  using Item = std::variant<vision::Frame, ClientRequest>;

  void send_text(std::string text);
  void vision_loop();
  void audio_loop();
  void on_frame(vision::Frame frame);
  void on_request(const ClientRequest& request);
  void feed_calibration(const ChainStep& step, double time_s);

  EngineConfig config_;
  Sink sink_;
  DropOldestQueue<Item> inbox_;
  LatestValue<AudioTick> mailbox_;

  // Owned by the vision worker.
  ControlChain chain_;
  std::optional<vision::Frame> last_frame_;
  std::uint64_t processed_ = 0;
  std::optional<Calibration> calibration_;

  std::thread vision_thread_;
  std::thread audio_thread_;
  bool stopped_ = false;
};

}  // namespace mouthsyrinx::engine
