// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "mouthsyrinx/engine/frames.hpp"
#include "mouthsyrinx/syrinx/analysis.hpp"
#include "mouthsyrinx/syrinx/model.hpp"
#include "mouthsyrinx/vision/pipeline.hpp"
#include "synthetic_face.hpp"

using namespace mouthsyrinx;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Per-pixel evaluation of the voting rules, independent of the library.
vision::BinaryMask brute_force_vote(const vision::BinaryMask& in) {
  vision::BinaryMask out(in.width, in.height);
  const int w = static_cast<int>(in.width), h = static_cast<int>(in.height);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < w && yy < h && in.at(xx, yy)) ++count;
        }
      const bool set = in.at(x, y);
      out.set(x, y, set ? count >= 4 : count > 4);
    }
  }
  return out;
}

Outcome voting_filter() {
  std::mt19937 rng(1);
  const auto t0 = Clock::now();
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    vision::BinaryMask m(64, 48);
    std::bernoulli_distribution bit(0.05 + 0.9 * (i % 10) / 9.0);
    for (auto& b : m.bits) b = bit(rng) ? 1 : 0;
    if (!(vision::vote_filter(m) == brute_force_vote(m))) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 5.0,
          "1000 random 64x48 masks, " + std::to_string(mismatches) + " mismatches, " + fmt(t) + " s"};
}

Outcome prediction() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coord(-1e4, 1e4), alpha(0.0, 2.0);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const Point2 c{coord(rng), coord(rng)}, prev{coord(rng), coord(rng)};
    const double a = alpha(rng);
    const Point2 p = vision::predict_center(c, prev, a);
    if (p.x != c.x + a * (c.x - prev.x) || p.y != c.y + a * (c.y - prev.y)) ++bad;
  }
  return {bad == 0, "1000 random triples, " + std::to_string(bad) + " differ from c + alpha (c - c_prev)"};
}

std::vector<vision::PixelCoord> random_blob(std::mt19937& rng) {
  std::uniform_int_distribution<int> size(2, 400), step(0, 7);
  const int n = size(rng);
  std::set<std::pair<int, int>> seen;
  std::vector<vision::PixelCoord> px;
  int x = 100, y = 100;
  while (static_cast<int>(px.size()) < n) {
    if (seen.insert({x, y}).second) px.push_back({x, y});
    static constexpr int dx[] = {1, 1, 0, -1, -1, -1, 0, 1}, dy[] = {0, 1, 1, 1, 0, -1, -1, -1};
    const int s = step(rng);
    x += dx[s];
    y += dy[s];
  }
  return px;
}

bool close_rel(double got, double want) {
  if (want == 0.0) return got == 0.0;
  return std::abs(got - want) <= 1e-9 * std::abs(want);
}

Outcome shape_features() {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> shift(-300, 300);
  int oracle_bad = 0, translate_bad = 0, dilate_bad = 0, aspect_checked = 0;
  for (int i = 0; i < 500; ++i) {
    const auto px = random_blob(rng);
    long double sx = 0, sy = 0;
    for (auto p : px) {
      sx += p.x;
      sy += p.y;
    }
    const long double n = static_cast<long double>(px.size());
    const long double mx = sx / n, my = sy / n;
    long double vx = 0, vy = 0;
    for (auto p : px) {
      vx += (p.x - mx) * (p.x - mx);
      vy += (p.y - my) * (p.y - my);
    }
    const double want_w = static_cast<double>(std::sqrt(vx / n)), want_h = static_cast<double>(std::sqrt(vy / n));

    const auto f = vision::shape_features(vision::Blob{px}, {});
    if (f.area != static_cast<double>(px.size()) || !close_rel(f.width, want_w) || !close_rel(f.height, want_h))
      ++oracle_bad;

    const int dx = shift(rng), dy = shift(rng);
    auto moved = px, doubled = px;
    for (auto& p : moved) p = {p.x + dx, p.y + dy};
    for (auto& p : doubled) p = {2 * p.x, 2 * p.y};
    const auto t = vision::shape_features(vision::Blob{moved}, {});
    if (t.area != f.area || t.height != f.height || t.width != f.width || t.aspect != f.aspect) ++translate_bad;
    const auto d = vision::shape_features(vision::Blob{doubled}, {});
    if (d.height != 2.0 * f.height || d.width != 2.0 * f.width) ++dilate_bad;
    // Aspect is scale free only where the width floor does not apply.
    if (f.width >= vision::kMinAspectWidth) {
      ++aspect_checked;
      if (d.aspect != f.aspect) ++dilate_bad;
    }
  }
  return {oracle_bad == 0 && translate_bad == 0 && dilate_bad == 0,
          "500 random blobs, oracle " + std::to_string(oracle_bad) + " / translation " +
              std::to_string(translate_bad) + " / dilation " + std::to_string(dilate_bad) + " failures (aspect on " +
              std::to_string(aspect_checked) + ")"};
}

Outcome tracking() {
  const auto t0 = Clock::now();
  constexpr double kDeg = std::numbers::pi / 180.0;
  std::size_t frames = 0, within = 0, lost = 0;
  int runs = 0;
  for (const Point2 start : {Point2{160.0, 60.0}, Point2{150.0, 70.0}}) {
    testing::FacePose pose;
    pose.nostril_mid = start;
    pose.d_n = 40.0;
    const auto poses = testing::moving_face_sequence(300, 4.0, 15.0 * kDeg, pose);
    vision::VisionPipeline pipe({});
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const auto frame = testing::make_frame(
          testing::render_face(320, 240, poses[i], static_cast<std::uint32_t>(i + 1000 * runs)), i);
      ++frames;
      vision::FrameAnalysis a;
      try {
        a = i == 0 ? pipe.initialize(frame) : pipe.process(frame);
      } catch (const Error&) {
        a.lost = true;
      }
      if (a.lost || !a.pair) {
        ++lost;
        break;
      }
      if (distance(vision::nostril_geometry(*a.pair).c_n, poses[i].nostril_mid) < 2.0) ++within;
    }
    ++runs;
  }
  const double t = seconds_since(t0);
  const double share = static_cast<double>(within) / static_cast<double>(frames);
  return {lost == 0 && share >= 0.95 && t < 30.0,
          std::to_string(runs) + " x 300 frames, 4 px/frame, +/-15 deg: " + fmt(100.0 * share, 4) +
              "% within 2 px, " + std::to_string(lost) + " lost, " + fmt(t) + " s"};
}

Outcome syrinx_energy() {
  const auto t0 = Clock::now();
  syrinx::SyrinxConfig config;
  double silent_rms = 0.0;
  for (double tension : syrinx::linear_grid(50.0, 200.0, 4)) {
    syrinx::SyrinxControls c;
    c.tension_left = c.tension_right = tension;
    syrinx::Syrinx s(config, c);
    const auto out = s.process_block(c, 44100);
    silent_rms = std::max(silent_rms, syrinx::rms(std::span(out).subspan(22050)));
  }
  double peak = 0.0;
  bool finite = true;
  std::size_t blowups = 0;
  for (double p : syrinx::linear_grid(100.0, 600.0, 5)) {
    for (double k : syrinx::linear_grid(0.5, 2.0, 5)) {
      syrinx::SyrinxControls c;
      c.p_lung = p;
      c.tension_left = c.tension_right = k * config.membrane.t_ref;
      syrinx::SyrinxControls rest = c;
      rest.p_lung = 0.0;
      syrinx::Syrinx s(config, rest);
      const auto out = s.process_block(c, static_cast<std::size_t>(10 * config.sample_rate));
      for (double v : out) {
        finite = finite && std::isfinite(v);
        peak = std::max(peak, std::abs(v));
      }
      blowups += s.blowup_count();
    }
  }
  const double t = seconds_since(t0);
  return {silent_rms < 1e-6 && finite && peak <= 1.0 && blowups == 0 && t < 180.0,
          "silent RMS " + fmt(silent_rms) + "; 5x5 box 100-600 Pa x 0.5-2 t_ref, 10 s each: peak " + fmt(peak) +
              ", finite " + (finite ? "yes" : "no") + ", " + std::to_string(blowups) + " blowups, " + fmt(t) + " s"};
}

constexpr double kOperatingPressure = 500.0;

std::vector<double> ladder_pitches(double sample_rate, bool& all_voiced) {
  syrinx::SyrinxConfig config;
  config.sample_rate = sample_rate;
  std::vector<double> f0;
  all_voiced = true;
  for (double t : syrinx::linear_grid(0.5 * config.membrane.t_ref, 2.0 * config.membrane.t_ref, 10)) {
    syrinx::SyrinxControls c;
    c.p_lung = 0.0;
    c.tension_left = c.tension_right = t;
    syrinx::Syrinx s(config, c);
    c.p_lung = kOperatingPressure;
    const auto out = s.process_block(c, static_cast<std::size_t>(sample_rate));
    const auto pitch = syrinx::estimate_pitch(std::span(out).subspan(out.size() / 2), sample_rate);
    if (!pitch) all_voiced = false;
    f0.push_back(pitch ? pitch->f0 : 0.0);
  }
  return f0;
}

Outcome pitch_ladder() {
  bool voiced = false, voiced2 = false;
  const auto f0 = ladder_pitches(44100.0, voiced);
  const auto f2 = ladder_pitches(88200.0, voiced2);
  bool increasing = true;
  for (std::size_t i = 1; i < f0.size(); ++i) increasing = increasing && f0[i] > f0[i - 1];
  double shift = 0.0;
  for (std::size_t i = 0; i < f0.size(); ++i) shift = std::max(shift, std::abs(f2[i] - f0[i]) / f0[i]);
  const double ratio = f0.back() / f0.front();
  return {voiced && voiced2 && increasing && ratio > 1.5 && shift < 0.02,
          "10 tensions at " + fmt(kOperatingPressure) + " Pa: " + fmt(f0.front(), 4) + " -> " + fmt(f0.back(), 4) +
              " Hz, ratio " + fmt(ratio) + ", increasing " + (increasing ? "yes" : "no") + ", 2x oversampling shift " +
              fmt(100.0 * shift) + "%"};
}

Outcome onset() {
  syrinx::SyrinxControls base;
  const double a = syrinx::onset_pressure({}, base, 0.0, 600.0, 1.0);
  const double b = syrinx::onset_pressure({}, base, 0.0, 600.0, 1.0);
  const double rel = std::abs(a - b) / a;
  return {rel <= 0.01, "onset " + fmt(a, 6) + " Pa and " + fmt(b, 6) + " Pa, difference " + fmt(100.0 * rel) + "%"};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome end_to_end(const fs::path& engine, const fs::path& config) {
  const fs::path dir = fs::temp_directory_path() / ("mouthsyrinx_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir / "frames");
  const auto images = testing::opening_mouth_sequence(60);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.ppm", i);
    engine::write_ppm(dir / "frames" / name, images[i]);
  }
  int status = 0;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "\"" + engine.string() + "\" run --frames \"" + (dir / "frames").string() +
                            "\" --config \"" + config.string() + "\" --out-wav \"" + (dir / (std::string(run) + ".wav")).string() +
                            "\" --out-controls \"" + (dir / (std::string(run) + ".csv")).string() + "\" 2>/dev/null";
    status |= std::system(cmd.c_str());
  }
  const std::string wav_a = read_all(dir / "a.wav"), wav_b = read_all(dir / "b.wav");
  const std::string csv_a = read_all(dir / "a.csv"), csv_b = read_all(dir / "b.csv");

  std::vector<double> area;
  std::istringstream lines(csv_a);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    std::istringstream cols(line);
    std::string cell;
    for (int c = 0; c < 3 && std::getline(cols, cell, ','); ++c) {
    }
    area.push_back(std::stod(cell));
  }
  bool monotone = area.size() == 60;
  for (std::size_t i = 1; i < area.size(); ++i) monotone = monotone && area[i] >= area[i - 1];
  const bool identical = !wav_a.empty() && wav_a == wav_b && csv_a == csv_b;
  const std::size_t expected_wav = 44 + 2 * 60 * 1470;
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {status == 0 && identical && monotone && wav_a.size() == expected_wav,
          "engine run x2 on 60 frames: WAV " + std::to_string(wav_a.size()) + " bytes, identical " +
              (identical ? "yes" : "no") + ", A column " + (area.empty() ? "missing" : fmt(area.front(), 5) + " -> " +
              fmt(area.back(), 5)) + ", monotone " + (monotone ? "yes" : "no")};
}

Outcome performance() {
  testing::FacePose start;
  start.nostril_mid = {320.0, 110.0};
  start.d_n = 80.0;
  const auto poses = testing::moving_face_sequence(120, 4.0, 0.2, start);
  std::vector<vision::Frame> frames;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    frames.push_back(testing::make_frame(testing::render_face(640, 480, poses[i], static_cast<std::uint32_t>(i)), i));
  }
  vision::VisionPipeline pipe({});
  std::vector<double> ms;
  bool lost = false;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto t0 = Clock::now();
    const auto a = i == 0 ? pipe.initialize(frames[i]) : pipe.process(frames[i]);
    ms.push_back(1e3 * seconds_since(t0));
    lost = lost || a.lost;
  }
  std::ranges::sort(ms);
  const double median = ms[ms.size() / 2];

  syrinx::SyrinxConfig config;
  syrinx::SyrinxControls c;
  c.p_lung = kOperatingPressure;
  syrinx::Syrinx s(config, c);
  const double audio_seconds = 20.0;
  const auto t0 = Clock::now();
  const auto out = s.process_block(c, static_cast<std::size_t>(audio_seconds * config.sample_rate));
  const double factor = audio_seconds / seconds_since(t0);
  return {!lost && median < 10.0 && factor >= 5.0 && !out.empty(),
          "vision median " + fmt(median) + " ms per 640x480 frame; synthesis " + fmt(factor) + "x real time"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <engine binary> <config file>\n";
    return 64;
  }
  const fs::path engine_bin = argv[1], config = argv[2];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"voting filter", voting_filter},
      {"prediction", prediction},
      {"shape features", shape_features},
      {"tracking", tracking},
      {"syrinx silence and energy", syrinx_energy},
      {"tension to pitch", pitch_ladder},
      {"oscillation onset", onset},
      {"end-to-end determinism", [&] { return end_to_end(engine_bin, config); }},
      {"performance", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed;
}
