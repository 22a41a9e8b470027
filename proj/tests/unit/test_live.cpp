#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <condition_variable>
#include <json.hpp>
#include <mutex>
#include <random>
#include <thread>

#include "mouthsyrinx/engine/offline.hpp"
#include "mouthsyrinx/engine/protocol.hpp"
#include "mouthsyrinx/engine/queues.hpp"
#include "mouthsyrinx/engine/server.hpp"
#include "mouthsyrinx/engine/session.hpp"
#include "mouthsyrinx/engine/wav.hpp"
#include "synthetic_face.hpp"

using namespace mouthsyrinx;
using namespace mouthsyrinx::engine;
using nlohmann::json;

namespace {

vision::BinaryMask random_mask(std::mt19937& rng, std::size_t w, std::size_t h, double p) {
  vision::BinaryMask m(w, h);
  std::bernoulli_distribution bit(p);
  for (auto& b : m.bits) b = bit(rng) ? 1 : 0;
  return m;
}

// Thread-safe record of everything a session sends.
class Collector {
 public:
  LiveSession::Sink sink() {
    return [this](Outgoing out) {
      {
        std::lock_guard lock(mutex_);
        items_.push_back(std::move(out));
      }
      cv_.notify_all();
    };
  }

  std::vector<json> texts() const {
    std::lock_guard lock(mutex_);
    std::vector<json> out;
    for (const auto& i : items_)
      if (i.kind == Outgoing::Kind::text) out.push_back(json::parse(i.text));
    return out;
  }

  std::vector<Outgoing> of_kind(Outgoing::Kind kind) const {
    std::lock_guard lock(mutex_);
    std::vector<Outgoing> out;
    for (const auto& i : items_)
      if (i.kind == kind) out.push_back(i);
    return out;
  }

  // Waits until `count` messages of the kind have arrived.
  bool wait_for(Outgoing::Kind kind, std::size_t count) {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, std::chrono::seconds(20), [&] {
      return static_cast<std::size_t>(std::count_if(items_.begin(), items_.end(), [&](const Outgoing& o) {
               return o.kind == kind;
             })) >= count;
    });
  }
  bool wait_texts(std::size_t count) { return wait_for(Outgoing::Kind::text, count); }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<Outgoing> items_;
};

std::vector<std::uint8_t> face_frame(std::uint32_t seq, double open = 0.6) {
  testing::FacePose pose;
  pose.nostril_mid = {160.0, 48.0};
  pose.mouth_open = open;
  return encode_frame(testing::render_face(320, 240, pose, 7), seq);
}

std::size_t count_type(const std::vector<json>& msgs, const std::string& type) {
  return static_cast<std::size_t>(
      std::count_if(msgs.begin(), msgs.end(), [&](const json& j) { return j["type"] == type; }));
}

EngineConfig live_config() {
  EngineConfig c;
  c.io.frame_queue = 1000;  // tests feed faster than real time and expect no drops
  return c;
}

}  // namespace

TEST_SUITE("wire codecs") {
  TEST_CASE("FRM0 layout") {
    vision::RgbImage img(2, 1);
    img.set(0, 0, {1, 2, 3});
    const auto b = encode_frame(img, 0x01020304);
    REQUIRE(b.size() == 4 + 2 + 2 + 4 + 6);
    CHECK(std::string(b.begin(), b.begin() + 4) == "FRM0");
    CHECK(b[4] == 2);
    CHECK(b[5] == 0);
    CHECK(b[6] == 1);
    CHECK(b[8] == 0x04);
    CHECK(b[11] == 0x01);
    const auto f = decode_frame(b);
    CHECK(f.seq == 0x01020304);
    CHECK(f.image.pixels == img.pixels);
  }

  TEST_CASE("malformed frames are rejected") {
    auto b = encode_frame(vision::RgbImage(4, 4), 1);
    auto short_b = b;
    short_b.pop_back();
    CHECK_THROWS_AS(decode_frame(short_b), ProtocolError);
    b.push_back(0);
    CHECK_THROWS_AS(decode_frame(b), ProtocolError);
    b[0] = 'X';
    CHECK_THROWS_AS(decode_frame(b), ProtocolError);
    CHECK_THROWS_AS(decode_frame(std::vector<std::uint8_t>{'F', 'R'}), ProtocolError);
  }

  TEST_CASE("MSK0 round trips random masks") {
    std::mt19937 rng(3);
    for (int i = 0; i < 200; ++i) {
      const auto m = random_mask(rng, 1 + rng() % 80, 1 + rng() % 60, (i % 5) / 4.0);
      const auto back = decode_mask(encode_mask(m, i));
      CHECK(back.seq == static_cast<std::uint32_t>(i));
      CHECK(back.mask == m);
    }
  }

  TEST_CASE("MSK0 starts with a clear run and splits long runs") {
    vision::BinaryMask m(3, 1);
    m.set(0, 0, true);
    const auto b = encode_mask(m, 0);
    REQUIRE(b.size() == 12 + 6);
    CHECK(b[12] == 0);  // empty clear run
    CHECK(b[14] == 1);
    CHECK(b[16] == 2);
    vision::BinaryMask big(400, 300);
    CHECK(decode_mask(encode_mask(big, 9)).mask == big);
    std::ranges::fill(big.bits, 1);
    CHECK(decode_mask(encode_mask(big, 9)).mask == big);
  }

  TEST_CASE("PCM0 round trip") {
    const std::vector<std::int16_t> s{0, 1, -1, 32767, -32767};
    const auto b = encode_pcm(s, 77);
    CHECK(std::string(b.begin(), b.begin() + 4) == "PCM0");
    CHECK(b[8] == 5);
    const auto back = decode_pcm(b);
    CHECK(back.seq == 77);
    CHECK(back.samples == s);
  }

  TEST_CASE("client requests parse") {
    const auto init = std::get<InitRequest>(parse_request(R"({"type":"init","x":10,"y":20})"));
    CHECK(init.x == 10);
    CHECK(init.y == 20);
    const auto thr = std::get<ThresholdsRequest>(parse_request(R"({"type":"thresholds","red_min":80,"intensity_max":90})"));
    CHECK(thr.thresholds.red_min == 80);
    const auto route = std::get<RouteRequest>(parse_request(
        R"({"type":"route","source":"height","target":"cc:5","out_min":0,"out_max":1,"curve":"linear"})"));
    CHECK(route.route.target == mapping::Target{mapping::TargetKind::midi_cc, 5});
    CHECK(std::get<CalibrateRequest>(parse_request(R"({"type":"calibrate","seconds":2.5})")).seconds == 2.5);
    for (const ClientRequest& r : {parse_request(R"({"type":"init","x":1,"y":2})"),
                                   parse_request(R"({"type":"calibrate","seconds":1})")}) {
      CHECK(format_request(parse_request(format_request(r))) == format_request(r));
    }
  }

  TEST_CASE("malformed requests") {
    for (const char* bad : {"{", "[]", R"({"x":1})", R"({"type":"dance"})", R"({"type":"init","x":1})",
                            R"({"type":"init","x":1.5,"y":2})", R"({"type":"thresholds","red_min":300,"intensity_max":9})",
                            R"({"type":"route","source":"area","target":"p_lung","out_min":5,"out_max":1})",
                            R"({"type":"calibrate","seconds":0})"}) {
      CHECK_THROWS_AS(parse_request(bad), ProtocolError);
    }
  }

  TEST_CASE("features message fields") {
    vision::FrameAnalysis a;
    a.features.area = 12.0;
    a.features.a_n = 0.25;
    a.pair = vision::NostrilPair({1.0, 2.0}, {5.0, 2.0});
    const auto j = json::parse(features_message(a, 4));
    CHECK(j["type"] == "features");
    CHECK(j["seq"] == 4);
    CHECK(j["A"] == 12.0);
    CHECK(j["n2"][0] == 5.0);
    CHECK(j["angle"] == 0.25);
    CHECK(j["lost"] == false);
    CHECK(json::parse(error_message("x"))["type"] == "error");
  }
}

TEST_SUITE("queues") {
  TEST_CASE("drop-oldest only drops droppable items") {
    DropOldestQueue<int> q(2);
    CHECK_FALSE(q.push(1, true));
    CHECK_FALSE(q.push(100, false));
    CHECK_FALSE(q.push(2, true));
    const auto dropped = q.push(3, true);
    REQUIRE(dropped);
    CHECK(*dropped == 1);
    CHECK(*q.pop() == 100);
    CHECK(*q.pop() == 2);
    CHECK(*q.pop() == 3);
    q.close();
    CHECK_FALSE(q.pop());
  }

  TEST_CASE("latest value mailbox keeps only the newest") {
    LatestValue<int> box;
    CHECK_FALSE(box.read());
    box.publish(1);
    box.publish(2);
    const auto v = box.wait_newer(0);
    REQUIRE(v);
    CHECK(v->first == 2);
    CHECK(v->second == 2);
    std::thread writer([&] { box.publish(3); });
    CHECK(box.wait_newer(2)->second == 3);
    writer.join();
    box.close();
    CHECK_FALSE(box.wait_newer(3));
  }
}

TEST_SUITE("live session") {
  TEST_CASE("init before any frame") {
    Collector out;
    LiveSession s(live_config(), out.sink());
    s.handle_text(R"({"type":"init","x":160,"y":48})");
    REQUIRE(out.wait_texts(1));
    const auto msgs = out.texts();
    CHECK(msgs[0]["type"] == "error");
    CHECK(msgs[0]["msg"] == "no frame yet");
  }

  TEST_CASE("one reply per message, increasing seq, audio follows frames") {
    Collector out;
    EngineConfig config = live_config();
    config.controls.p_lung = 500.0;
    LiveSession s(config, out.sink());
    s.handle_binary(face_frame(1));
    s.handle_text(R"({"type":"init","x":160,"y":48})");
    for (std::uint32_t seq = 2; seq <= 10; ++seq) s.handle_binary(face_frame(seq, 0.3 + 0.05 * seq));
    s.handle_binary(face_frame(5));                       // stale
    s.handle_text("not json");                            // malformed
    s.handle_binary(std::vector<std::uint8_t>{'F', 'R'});  // truncated
    REQUIRE(out.wait_texts(10 + 1 + 3));
    s.stop();

    const auto msgs = out.texts();
    CHECK(msgs.size() == 14);
    CHECK(count_type(msgs, "features") == 10);
    CHECK(count_type(msgs, "ack") == 1);
    CHECK(count_type(msgs, "error") == 3);
    std::int64_t last = -1;
    for (const auto& m : msgs) {
      if (m["type"] != "features") continue;
      CHECK(m["seq"].get<std::int64_t>() > last);
      last = m["seq"];
      CHECK(m["lost"] == (m["seq"] == 1));
    }
    CHECK(out.of_kind(Outgoing::Kind::mask).size() == 10);

    const auto audio = out.of_kind(Outgoing::Kind::audio);
    REQUIRE_FALSE(audio.empty());
    std::int64_t last_audio = -1;
    std::size_t samples = 0;
    double peak = 0.0;
    for (const auto& a : audio) {
      const auto pcm = decode_pcm(a.bytes);
      CHECK(static_cast<std::int64_t>(pcm.seq) > last_audio);
      last_audio = pcm.seq;
      samples += pcm.samples.size();
      for (auto v : pcm.samples) peak = std::max(peak, std::abs(v / 32767.0));
    }
    CHECK(last_audio == 10);
    CHECK(samples == 10 * 1470);
    CHECK(peak > 0.01);
  }

  TEST_CASE("thresholds update shows in the next features and overlay") {
    Collector out;
    LiveSession s(live_config(), out.sink());
    s.handle_binary(face_frame(1));
    s.handle_text(R"({"type":"init","x":160,"y":48})");
    s.handle_binary(face_frame(2));
    s.handle_text(R"({"type":"thresholds","red_min":255,"intensity_max":0})");
    s.handle_binary(face_frame(3));
    REQUIRE(out.wait_texts(5));
    s.stop();
    const auto msgs = out.texts();
    std::vector<json> features;
    for (const auto& m : msgs)
      if (m["type"] == "features") features.push_back(m);
    REQUIRE(features.size() == 3);
    CHECK(features[1]["A"].get<double>() > 0.0);
    CHECK(features[2]["A"] == 0.0);
    CHECK(features[2]["lost"] == false);
    const auto masks = out.of_kind(Outgoing::Kind::mask);
    REQUIRE(masks.size() == 3);
    CHECK(decode_mask(masks[1].bytes).mask.count() > 0);
    CHECK(decode_mask(masks[2].bytes).mask.count() == 0);
  }

  TEST_CASE("route and calibrate requests") {
    Collector out;
    LiveSession s(live_config(), out.sink());
    s.handle_binary(face_frame(1));
    s.handle_text(R"({"type":"init","x":160,"y":48})");
    s.handle_text(R"({"type":"route","source":"height","target":"cc:3","out_min":0,"out_max":1})");
    s.handle_text(R"({"type":"calibrate","seconds":0.2})");
    for (std::uint32_t seq = 2; seq <= 12; ++seq) s.handle_binary(face_frame(seq, 0.2 + 0.06 * seq));
    REQUIRE(out.wait_texts(12 + 3));
    s.stop();
    const auto msgs = out.texts();
    CHECK(count_type(msgs, "ack") == 3);
    CHECK(count_type(msgs, "error") == 0);
  }

  TEST_CASE("paced audio stream matches a single-threaded render of the same input") {
    // Frames are paced like a camera so the audio worker sees every control
    // frame. The reference replays the same messages through the offline
    // building blocks on one thread.
    EngineConfig config = live_config();
    Collector out;
    LiveSession s(config, out.sink());
    std::vector<vision::Frame> frames;
    for (std::uint32_t seq = 1; seq <= 16; ++seq) {
      const auto bytes = face_frame(seq, 0.2 + 0.05 * seq);
      s.handle_binary(bytes);
      REQUIRE(out.wait_for(Outgoing::Kind::audio, seq));
      if (seq == 1) s.handle_text(R"({"type":"init","x":160,"y":48})");
      vision::Frame f = decode_frame(bytes);
      f.timestamp = static_cast<double>(seq) / config.io.fps;
      frames.push_back(std::move(f));
    }
    REQUIRE(out.wait_texts(17));
    s.stop();

    std::vector<std::int16_t> live;
    for (const auto& a : out.of_kind(Outgoing::Kind::audio)) {
      const auto pcm = decode_pcm(a.bytes);
      live.insert(live.end(), pcm.samples.begin(), pcm.samples.end());
    }

    ControlChain chain(config);
    AudioRenderer audio(config);
    std::vector<double> reference;
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const ChainStep step = chain.process(frames[k]);
      audio.render(step.control.syrinx, streaming_sample_count(k, config.io.sample_rate, config.io.fps), reference);
      if (k == 0) chain.initialize(frames[0], Point2{160.0, 48.0});
    }
    REQUIRE(live.size() == reference.size());
    CHECK(live.size() == 16 * 1470);
    for (std::size_t i = 0; i < 1470; ++i) CHECK(live[i] == 0);
    int worst = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      worst = std::max(worst, std::abs(int{live[i]} - int{to_pcm16(reference[i])}));
    }
    CHECK(worst <= 1);
  }

  TEST_CASE("a full vision queue drops the oldest frame with an error") {
    Collector out;
    EngineConfig config;
    config.io.frame_queue = 1;
    LiveSession s(config, out.sink());
    for (std::uint32_t seq = 1; seq <= 30; ++seq) s.handle_binary(face_frame(seq));
    REQUIRE(out.wait_texts(30));
    s.stop();
    const auto msgs = out.texts();
    CHECK(msgs.size() == 30);
    CHECK(count_type(msgs, "features") + count_type(msgs, "error") == 30);
    CHECK(count_type(msgs, "features") >= 1);
  }
}

TEST_SUITE("server") {
  namespace asio = boost::asio;
  namespace beast = boost::beast;
  namespace websocket = beast::websocket;
  using tcp = asio::ip::tcp;

  struct Client {
    asio::io_context io;
    websocket::stream<tcp::socket> ws{io};
    explicit Client(std::uint16_t port) {
      tcp::resolver resolver(io);
      asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
      ws.handshake("127.0.0.1", "/");
    }
    void text(const std::string& s) {
      ws.text(true);
      ws.write(asio::buffer(s));
    }
    void binary(const std::vector<std::uint8_t>& b) {
      ws.binary(true);
      ws.write(asio::buffer(b));
    }
    // Next text message, skipping binary ones.
    json next_text() {
      for (;;) {
        beast::flat_buffer buf;
        ws.read(buf);
        if (ws.got_text()) return json::parse(beast::buffers_to_string(buf.data()));
      }
    }
  };

  TEST_CASE("one client is served, a second is turned away") {
    Server server(live_config(), "127.0.0.1", 0);
    REQUIRE(server.port() != 0);
    server.start();
    {
      Client first(server.port());
      first.text(R"({"type":"init","x":1,"y":1})");
      CHECK(first.next_text()["msg"] == "no frame yet");

      Client second(server.port());
      const auto busy = second.next_text();
      CHECK(busy["type"] == "error");
      CHECK(busy["msg"] == "busy");

      first.binary(face_frame(1));
      const auto f = first.next_text();
      CHECK(f["type"] == "features");
      CHECK(f["seq"] == 1);
      first.text(R"({"type":"init","x":160,"y":48})");
      CHECK(first.next_text()["type"] == "ack");
      first.binary(face_frame(2));
      const auto g = first.next_text();
      CHECK(g["lost"] == false);
      CHECK(g["A"].get<double>() > 0.0);
      first.ws.close(websocket::close_code::normal);
    }
    // The slot frees once the first client leaves.
    bool served = false;
    for (int attempt = 0; attempt < 50 && !served; ++attempt) {
      Client third(server.port());
      third.text(R"({"type":"init","x":1,"y":1})");
      served = third.next_text()["msg"] == "no frame yet";
      if (!served) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    CHECK(served);
    server.stop();
  }

  TEST_CASE("a taken port is a bind error") {
    Server a(EngineConfig{}, "127.0.0.1", 0);
    CHECK_THROWS_AS(Server(EngineConfig{}, "127.0.0.1", a.port()), BindError);
  }
}
