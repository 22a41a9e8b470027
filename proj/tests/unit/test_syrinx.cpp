#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mouthsyrinx/syrinx/analysis.hpp"
#include "mouthsyrinx/syrinx/model.hpp"

using namespace mouthsyrinx;
using namespace mouthsyrinx::syrinx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOperatingPressure = 500.0;

SyrinxControls at_pressure(double p, double tension = 100.0) {
  SyrinxControls c;
  c.p_lung = p;
  c.tension_left = c.tension_right = tension;
  return c;
}

double peak(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_SUITE("syrinx coefficients") {
  TEST_CASE("trachea delay of the default anatomy") {
    CHECK(tube_delay(44100.0, 0.07, 347.0) == 9);
    const auto c = derive_coefficients({}, {});
    CHECK(c.trachea_delay == 9);
    CHECK(c.bronchus_delay == 3);  // round(44100 * 0.02 / 347) = round(2.54)
  }

  TEST_CASE("reference tension gives the reference frequency") {
    MembraneParams m;
    CHECK(tension_to_omega(m, m.t_ref) == 2.0 * kPi * m.f_ref);
    CHECK(tension_to_omega(m, 4.0 * m.t_ref) == doctest::Approx(4.0 * kPi * m.f_ref));
  }

  TEST_CASE("tube too short for one sample is a config error") {
    SyrinxConfig cfg;
    cfg.trachea_length = 0.001;  // 0.127 samples
    CHECK_THROWS_AS(derive_coefficients(cfg, {}), ConfigError);
  }

  TEST_CASE("config validation") {
    SyrinxConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.membrane.damping_ratio = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.beak_reflection = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n_valves = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.h_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("control validation") {
    CHECK_NOTHROW(SyrinxControls{}.validate());
    CHECK_THROWS_AS(at_pressure(-1.0).validate(), ConfigError);
    CHECK_THROWS_AS(at_pressure(100.0, 0.0).validate(), ConfigError);
    SyrinxControls c;
    c.trachea_length_scale = 2.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.trachea_radius_scale = 0.4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_SUITE("valve") {
  const Coefficients coeff = derive_coefficients({}, {});
  const double dt = coeff.dt;

  TEST_CASE("zero pressure at rest is a fixed point") {
    const ValveState rest{};
    const auto r = valve_step(rest, 0.0, 0.0, coeff, dt);
    CHECK(r.state.u_flow == 0.0);
    CHECK(r.state.x == 0.0);
    CHECK(r.state.x_vel == 0.0);
    CHECK(r.tracheal_wave == 0.0);
  }

  TEST_CASE("pressure step from rest drives flow and the membrane") {
    const auto r = valve_step(ValveState{}, 200.0, 0.0, coeff, dt);
    CHECK(r.state.u_flow > 0.0);
    CHECK(r.state.x_vel != 0.0);
    // Bernoulli across the channel: p0 - p1 = (U / (w h sqrt(2/rho)))^2.
    const double c = coeff.valves[0].flow_gain * coeff.valves[0].rest_gap;
    const double drop = r.state.p_bronchial - r.state.p_tracheal;
    CHECK(drop == doctest::Approx(std::pow(r.state.u_flow / c, 2)).epsilon(1e-10));
  }

  TEST_CASE("closed membrane clamps the aperture") {
    ValveState v;
    v.x = -2.0 * coeff.valves[0].rest_gap;
    CHECK(aperture(v, coeff.valves[0]) == coeff.valves[0].h_min);
    const auto r = valve_step(v, 500.0, 0.0, coeff, dt);
    CHECK(std::isfinite(r.state.u_flow));
    CHECK(r.state.u_flow > 0.0);
  }

  TEST_CASE("reverse pressure gives reverse flow") {
    const auto r = valve_step(ValveState{}, 0.0, 300.0, coeff, dt);
    CHECK(r.state.u_flow < 0.0);
  }

  TEST_CASE("two-valve junction satisfies Bernoulli in both channels") {
    SyrinxConfig cfg;
    cfg.n_valves = 2;
    const auto c2 = derive_coefficients(cfg, {});
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> pressure(-800, 800), gap(1e-5, 1e-3);
    for (int i = 0; i < 500; ++i) {
      const std::array<double, 2> h{gap(rng), gap(rng)};
      const std::array<double, 2> a{pressure(rng), pressure(rng)};
      const double b = pressure(rng);
      const auto u = solve_junction(h, a, b, c2, std::span(c2.valves.data(), 2));
      const double p1 = b + c2.z_trachea * (u[0] + u[1]);
      for (std::size_t k = 0; k < 2; ++k) {
        const double p0 = a[k] - c2.z_bronchus * u[k];
        const double c = c2.valves[k].flow_gain * h[k];
        const double expected = std::copysign(std::pow(u[k] / c, 2), u[k]);
        CHECK(p0 - p1 == doctest::Approx(expected).epsilon(1e-7).scale(1.0));
      }
    }
  }
}

TEST_SUITE("syrinx render") {
  TEST_CASE("zero lung pressure is silent") {
    for (double t : linear_grid(50.0, 200.0, 4)) {
      Syrinx s({}, at_pressure(0.0, t));
      const auto out = s.process_block(at_pressure(0.0, t), 44100);
      CHECK(rms(std::span(out).subspan(22050)) < 1e-6);
    }
  }

  TEST_CASE("an excited system decays once the pressure is removed") {
    Syrinx s({}, at_pressure(0.0));
    s.process_block(at_pressure(kOperatingPressure), 22050);
    const auto out = s.process_block(at_pressure(0.0), 44100);
    CHECK(peak(std::span(out).subspan(22050)) < 1e-6);
  }

  TEST_CASE("operating point sustains oscillation") {
    Syrinx s({}, at_pressure(0.0));
    const auto out = s.process_block(at_pressure(kOperatingPressure), 88200);
    CHECK(rms(std::span(out).subspan(44100)) > 0.01);
    CHECK(peak(out) <= 1.0);
  }

  TEST_CASE("renders are deterministic") {
    Syrinx a({}, {}), b({}, {});
    const auto x = a.process_block(at_pressure(kOperatingPressure, 130.0), 20000);
    const auto y = b.process_block(at_pressure(kOperatingPressure, 130.0), 20000);
    CHECK(x == y);
  }

  TEST_CASE("block composition") {
    Syrinx a({}, {}), b({}, {});
    const auto t = at_pressure(kOperatingPressure);
    a.process_block(t, 1000);
    b.process_block(t, 1000);
    const auto before = a.state().sample_count;
    CHECK(a.process_block(t, 0).empty());
    CHECK(a.state().sample_count == before);
    auto first = a.process_block(t, 64);
    const auto second = a.process_block(t, 64);
    first.insert(first.end(), second.begin(), second.end());
    CHECK(first == b.process_block(t, 128));
    Syrinx c({}, {});
    CHECK(c.process_block(t, 44100).size() == 44100);
  }

  TEST_CASE("smoothed controls converge to held targets") {
    Syrinx s({}, {});
    SyrinxControls target = at_pressure(300.0, 150.0);
    target.trachea_length_scale = 1.5;
    s.process_block(target, 44100);
    const auto& sc = s.state().smoothed_controls;
    CHECK(sc.p_lung == doctest::Approx(300.0));
    CHECK(sc.tension_left == doctest::Approx(150.0));
    CHECK(sc.trachea_length_scale == doctest::Approx(1.5));
    CHECK(s.coefficients().trachea_delay == tube_delay(44100.0, 0.07 * 1.5, 347.0));
  }

  TEST_CASE("impulse round trip through the beak") {
    Syrinx s({}, {});
    s.freeze_membrane(true);
    s.inject_tracheal_wave(1.0);
    std::vector<double> arrivals;
    for (int i = 0; i < 34; ++i) {
      s.tick({});
      arrivals.push_back(s.last_tracheal_arrival());
    }
    const auto d = s.coefficients().trachea_delay;
    const auto peak_at = static_cast<std::size_t>(
        std::ranges::max_element(arrivals, {}, [](double v) { return std::abs(v); }) - arrivals.begin());
    CHECK(peak_at + 2 >= 2 * d);
    CHECK(peak_at <= 2 * d + 2);
    const double total = std::accumulate(arrivals.begin(), arrivals.end(), 0.0);
    CHECK(total == doctest::Approx(-0.85).epsilon(0.01));
  }

  TEST_CASE("two valves with different tensions") {
    SyrinxConfig cfg;
    cfg.n_valves = 2;
    // Two valves load the trachea with the summed flow, which moves the
    // oscillating region to higher pressures and tensions.
    SyrinxControls c = at_pressure(700.0);
    c.tension_left = 130.0;
    c.tension_right = 160.0;
    Syrinx s(cfg, at_pressure(0.0));
    const auto out = s.process_block(c, 44100);
    CHECK(s.blowup_count() == 0);
    CHECK(std::ranges::all_of(out, [](double v) { return std::isfinite(v) && std::abs(v) <= 1.0; }));
    CHECK(rms(std::span(out).subspan(22050)) > 1e-3);
  }

  TEST_CASE("blowup zeroes the state, mutes and reports") {
    Syrinx s({}, {});
    const auto huge = at_pressure(1e308);
    std::size_t n = 0;
    while (s.blowup_count() == 0 && n < 100000) {
      s.tick(huge);
      ++n;
    }
    REQUIRE(s.blowup_count() == 1);
    const auto event = s.take_blowup();
    REQUIRE(event);
    CHECK(event->sample == n - 1);
    CHECK_FALSE(event->what.empty());
    CHECK_FALSE(s.take_blowup());
    for (const auto& v : s.state().valves) CHECK(v == ValveState{});
    const auto muted = s.process_block(huge, 2204);
    CHECK(std::ranges::all_of(muted, [](double v) { return v == 0.0; }));
    CHECK(s.blowup_count() == 1);
  }
}

TEST_SUITE("pitch") {
  TEST_CASE("440 Hz sine") {
    std::vector<double> x(8192);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * kPi * 440.0 * static_cast<double>(i) / 44100.0);
    const auto e = estimate_pitch(x, 44100.0);
    REQUIRE(e);
    CHECK(std::abs(e->f0 - 440.0) <= 1.0);
    CHECK(e->confidence > 0.9);
  }

  TEST_CASE("constant signal is unvoiced") {
    const std::vector<double> x(8192, 0.3);
    CHECK_FALSE(estimate_pitch(x, 44100.0).has_value());
  }

  TEST_CASE("white noise is unvoiced") {
    int voiced = 0;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
      std::mt19937 rng(seed);
      std::normal_distribution<double> g;
      std::vector<double> x(8192);
      for (auto& v : x) v = g(rng);
      if (estimate_pitch(x, 44100.0)) ++voiced;
    }
    CHECK(voiced <= 2);
  }

  TEST_CASE("short windows are rejected") {
    CHECK_THROWS_AS(estimate_pitch(std::vector<double>(100, 0.0), 44100.0), TooShort);
  }

  TEST_CASE("classifier") {
    std::vector<double> silent(8192, 0.0), tone(8192), doubled(8192);
    for (std::size_t i = 0; i < tone.size(); ++i) {
      const double t = static_cast<double>(i) / 44100.0;
      tone[i] = 0.5 * std::sin(2.0 * kPi * 600.0 * t);
      doubled[i] = tone[i] + 0.4 * std::sin(2.0 * kPi * 300.0 * t);
    }
    CHECK(classify(silent, 44100.0) == Regime::silent);
    double f0 = 0.0;
    CHECK(classify(tone, 44100.0, &f0) == Regime::periodic);
    CHECK(f0 == doctest::Approx(600.0).epsilon(0.01));
    CHECK(classify(doubled, 44100.0) == Regime::period_doubled);
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> noise(8192);
    for (auto& v : noise) v = 0.1 * g(rng);
    CHECK(classify(noise, 44100.0) == Regime::aperiodic);
  }
}

TEST_SUITE("stability scan") {
  TEST_CASE("grid shape and silent zero-pressure row") {
    const auto pressures = linear_grid(0.0, 500.0, 3);
    const auto tensions = linear_grid(60.0, 180.0, 4);
    const auto cells = stability_scan({}, pressures, tensions);
    REQUIRE(cells.size() == 12);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(cells[j].pressure == 0.0);
      CHECK(cells[j].tension == tensions[j]);
      CHECK(cells[j].regime == Regime::silent);
    }
    CHECK(cells[11].pressure == 500.0);
    CHECK(cells[11].tension == 180.0);
  }

  TEST_CASE("empty grids are rejected") {
    const std::vector<double> none;
    const auto some = linear_grid(0.0, 1.0, 2);
    CHECK_THROWS_AS(stability_scan({}, none, some), ConfigError);
  }

  TEST_CASE("just above the onset the model oscillates") {
    const double onset = onset_pressure({}, at_pressure(0.0), 0.0, 600.0, 2.0);
    CHECK(onset > 0.0);
    CHECK(onset < kOperatingPressure);
    SyrinxControls c = at_pressure(onset * 1.05);
    const auto cell = render_cell({}, c);
    CHECK(cell.regime == Regime::periodic);
    c.p_lung = onset * 0.8;
    CHECK(render_cell({}, c).regime == Regime::silent);
  }
}
