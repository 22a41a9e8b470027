#include "mouthsyrinx/engine/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mouthsyrinx::engine {

using mapping::Curve;
using mapping::Feature;
using mapping::MapRoute;
using mapping::Target;
using mapping::TargetKind;

void IoConfig::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ConfigError("io: fps must be positive");
  if (!(sample_rate >= 8000.0) || !std::isfinite(sample_rate)) {
    throw ConfigError("io: sample_rate must be at least 8000");
  }
  if (port < 0 || port > 65535) throw ConfigError("io: port must be in [0, 65535]");
  if (frame_queue < 1) throw ConfigError("io: frame_queue must be at least 1");
  if (audio_queue < 1) throw ConfigError("io: audio_queue must be at least 1");
}

std::vector<MapRoute> MappingConfig::default_routes() {
  MapRoute aspect;
  aspect.source = Feature::aspect;
  aspect.target = {TargetKind::tension_left};
  aspect.curve = Curve::exponential;
  aspect.out_min = 50.0;
  aspect.out_max = 200.0;

  MapRoute area;
  area.source = Feature::area;
  area.target = {TargetKind::p_lung};
  area.out_min = 0.0;
  area.out_max = 800.0;

  MapRoute width;
  width.source = Feature::width;
  width.target = {TargetKind::trachea_length_scale};
  width.out_min = 0.8;
  width.out_max = 1.25;
  width.invert = true;
  return {aspect, area, width};
}

void EngineConfig::validate() const {
  vision.validate();
  synth_config().validate();
  derive_coefficients(synth_config(), controls);
  controls.validate();
  mapping::validate_routes(mapping.routes);
  mapping.calibration.validate();
  io.validate();
}

syrinx::SyrinxConfig EngineConfig::synth_config() const {
  syrinx::SyrinxConfig c = syrinx;
  c.sample_rate = io.sample_rate;
  return c;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::logic_error("number formatting failed");
  return std::string(buf.data(), end);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

long parse_integer(std::string_view s) {
  long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

struct Field {
  std::string_view section;
  std::string_view key;
  std::function<void(EngineConfig&, std::string_view)> read;
  std::function<std::string(const EngineConfig&)> write;
};

template <typename Member>
Field number_field(std::string_view section, std::string_view key, Member member) {
  return {section, key,
          [member](EngineConfig& c, std::string_view v) { std::invoke(member, c) = parse_double(v); },
          [member](const EngineConfig& c) { return format_number(std::invoke(member, c)); }};
}

template <typename Int, typename Member>
Field integer_field(std::string_view section, std::string_view key, Member member) {
  return {section, key,
          [member](EngineConfig& c, std::string_view v) {
            const long n = parse_integer(v);
            if (n < 0 && std::is_unsigned_v<Int>) throw ConfigError("value must be non-negative");
            std::invoke(member, c) = static_cast<Int>(n);
          },
          [member](const EngineConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

// Accessors are lambdas so nested members can be reached.
#define NUMBER(section, key, expr) \
  number_field(section, key, [](auto& c) -> auto& { return c.expr; })
#define INTEGER(type, section, key, expr) \
  integer_field<type>(section, key, [](auto& c) -> auto& { return c.expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      INTEGER(int, "vision", "red_min", vision.thresholds.red_min),
      INTEGER(int, "vision", "intensity_max", vision.thresholds.intensity_max),
      NUMBER("vision", "alpha", vision.tracker.alpha),
      NUMBER("vision", "beta_d", vision.tracker.beta_d),
      NUMBER("vision", "beta_a", vision.tracker.beta_a),
      INTEGER(std::size_t, "vision", "smoothing_window", vision.tracker.search.smoothing_window),
      NUMBER("vision", "prominence", vision.tracker.search.prominence),
      NUMBER("vision", "search_half_width", vision.tracker.search_half_width),
      NUMBER("vision", "search_half_height", vision.tracker.search_half_height),
      NUMBER("vision", "init_x0", vision.tracker.init_x0),
      NUMBER("vision", "init_x1", vision.tracker.init_x1),
      NUMBER("vision", "init_y0", vision.tracker.init_y0),
      NUMBER("vision", "init_y1", vision.tracker.init_y1),
      NUMBER("vision", "min_d_n", vision.tracker.min_d_n),
      NUMBER("vision", "lock_band_low", vision.tracker.lock_band_low),
      NUMBER("vision", "lock_band_high", vision.tracker.lock_band_high),
      NUMBER("vision", "mouth_down", vision.mouth.k_down),
      NUMBER("vision", "mouth_half_width", vision.mouth.k_w),
      NUMBER("vision", "mouth_half_height", vision.mouth.k_h),

      INTEGER(int, "syrinx", "n_valves", syrinx.n_valves),
      NUMBER("syrinx", "trachea_length", syrinx.trachea_length),
      NUMBER("syrinx", "trachea_radius", syrinx.trachea_radius),
      NUMBER("syrinx", "bronchus_length", syrinx.bronchus_length),
      NUMBER("syrinx", "bronchus_radius", syrinx.bronchus_radius),
      NUMBER("syrinx", "membrane_mass", syrinx.membrane.mass),
      NUMBER("syrinx", "rest_gap", syrinx.membrane.rest_gap),
      NUMBER("syrinx", "membrane_width", syrinx.membrane.width),
      NUMBER("syrinx", "damping_ratio", syrinx.membrane.damping_ratio),
      NUMBER("syrinx", "f_ref", syrinx.membrane.f_ref),
      NUMBER("syrinx", "t_ref", syrinx.membrane.t_ref),
      NUMBER("syrinx", "drive_area", syrinx.membrane.drive_area),
      NUMBER("syrinx", "air_density", syrinx.air.rho),
      NUMBER("syrinx", "sound_speed", syrinx.air.c),
      NUMBER("syrinx", "beak_reflection", syrinx.beak_reflection),
      NUMBER("syrinx", "beak_pole", syrinx.beak_pole),
      NUMBER("syrinx", "lung_reflection", syrinx.lung_reflection),
      NUMBER("syrinx", "h_min", syrinx.h_min),
      NUMBER("syrinx", "output_gain", syrinx.output_gain),
      NUMBER("syrinx", "smoothing_ms", syrinx.smoothing_ms),
      NUMBER("syrinx", "p_lung", controls.p_lung),
      NUMBER("syrinx", "tension_left", controls.tension_left),
      NUMBER("syrinx", "tension_right", controls.tension_right),
      NUMBER("syrinx", "trachea_length_scale", controls.trachea_length_scale),
      NUMBER("syrinx", "trachea_radius_scale", controls.trachea_radius_scale),

      NUMBER("io", "fps", io.fps),
      NUMBER("io", "sample_rate", io.sample_rate),
      INTEGER(int, "io", "port", io.port),
      INTEGER(std::size_t, "io", "frame_queue", io.frame_queue),
      INTEGER(std::size_t, "io", "audio_queue", io.audio_queue),
  };
  return table;
}

#undef NUMBER
#undef INTEGER

constexpr std::array<std::string_view, 4> kSections{"vision", "syrinx", "mapping", "io"};

}  // namespace

MapRoute parse_route(std::string_view text) {
  const auto words = split_words(text);
  if (words.size() < 5 || words[1] != "->") {
    throw ConfigError("route must read '<feature> -> <target> <curve> <min> <max> [invert] [smoothing_ms=N]'");
  }
  MapRoute r;
  r.source = mapping::parse_feature(words[0]);
  r.target = mapping::parse_target(words[2]);
  if (words.size() < 6) throw ConfigError("route is missing its output range");
  r.curve = mapping::parse_curve(words[3]);
  r.out_min = parse_double(words[4]);
  r.out_max = parse_double(words[5]);
  for (std::size_t i = 6; i < words.size(); ++i) {
    const auto w = words[i];
    if (w == "invert") {
      r.invert = true;
    } else if (w.starts_with("smoothing_ms=")) {
      r.smoothing_ms = parse_double(w.substr(13));
    } else {
      throw ConfigError("unknown route option '" + std::string(w) + "'");
    }
  }
  r.validate();
  return r;
}

std::string format_route(const MapRoute& r) {
  std::string s = std::string(mapping::to_string(r.source)) + " -> " + mapping::to_string(r.target) + " " +
                  std::string(mapping::to_string(r.curve)) + " " + format_number(r.out_min) + " " +
                  format_number(r.out_max);
  if (r.invert) s += " invert";
  if (r.smoothing_ms != 0.0) s += " smoothing_ms=" + format_number(r.smoothing_ms);
  return s;
}

EngineConfig parse_config(std::string_view text) {
  EngineConfig config;
  std::string section;
  std::set<std::string> seen;
  bool routes_given = false;
  std::size_t line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";

    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    try {
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
          throw ConfigError("unknown section [" + section + "]");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'");
      const std::string key(trim(line.substr(0, eq)));
      const std::string_view value = trim(line.substr(eq + 1));
      if (section.empty()) throw ConfigError("key '" + key + "' outside of a section");
      if (value.empty()) throw ConfigError("key '" + key + "' has no value");

      if (section == "mapping" && key == "route") {
        if (!routes_given) config.mapping.routes.clear();
        routes_given = true;
        if (value == "none") continue;
        config.mapping.routes.push_back(parse_route(value));
        mapping::validate_routes(config.mapping.routes);
        continue;
      }
      const std::string qualified = section + "." + key;
      if (!seen.insert(qualified).second) throw ConfigError("duplicate key '" + key + "'");

      if (section == "mapping" && key.starts_with("calibration.")) {
        const Feature f = mapping::parse_feature(std::string_view(key).substr(12));
        const auto words = split_words(value);
        if (words.size() != 2) throw ConfigError("calibration needs '<min> <max>'");
        config.mapping.calibration[f] = {parse_double(words[0]), parse_double(words[1])};
        continue;
      }
      const auto& table = fields();
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == table.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      it->read(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  config.syrinx.sample_rate = config.io.sample_rate;
  config.validate();
  return config;
}

std::string serialize_config(const EngineConfig& config) {
  std::ostringstream out;
  for (const auto section : kSections) {
    if (section != kSections.front()) out << '\n';
    out << '[' << section << "]\n";
    if (section == "mapping") {
      if (config.mapping.routes.empty()) out << "route = none\n";
      for (const auto& r : config.mapping.routes) out << "route = " << format_route(r) << '\n';
      for (Feature f : mapping::kAllFeatures) {
        const auto& range = config.mapping.calibration[f];
        out << "calibration." << mapping::to_string(f) << " = " << format_number(range.min) << ' '
            << format_number(range.max) << '\n';
      }
      continue;
    }
    for (const auto& f : fields())
      if (f.section == section) out << f.key << " = " << f.write(config) << '\n';
  }
  return out.str();
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_config(const std::filesystem::path& path, const EngineConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config " + path.string());
  out << serialize_config(config);
  if (!out) throw IoError("failed writing config " + path.string());
}

}  // namespace mouthsyrinx::engine
