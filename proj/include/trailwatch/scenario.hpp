#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trailwatch/config.hpp"
#include "trailwatch/error.hpp"
#include "trailwatch/preprocess.hpp"
#include "trailwatch/rng.hpp"
#include "trailwatch/tags.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

/// One plateau (or ramp toward a plateau) of the four-factor weather
/// schedule. `fluct` amplitudes add a deterministic per-station sinusoid;
/// ramp phases interpolate linearly from the previous phase's values and
/// therefore carry no fluctuation (validated at load).
struct WeatherPhase {
  std::int64_t start = 0;  // simulated seconds
  WeatherReading base;
  WeatherReading fluct;  // sinusoid amplitude per factor
  bool ramp = false;
};

/// Operator action scheduled inside a scenario run.
struct ScheduledControl {
  std::int64_t at = 0;
  std::optional<Avalanche> avalanche;
  std::optional<std::string> alert_set;
};

/// Everything the environment generator needs besides the area itself.
struct SimParams {
  std::int64_t duration_s = 3600;
  std::int64_t tick_s = 1;
  double speedup = 25.0;  // simulated/wall ratio; bookkeeping only

  // Arrival process: time-varying Poisson with a normal-shaped rate peak.
  double peak_concurrent = 35.0;
  double peak_hour = 14.0;  // environment clock
  double sigma_hours = 4.0;
  double mean_stay_s = 0.0;  // 0 = estimate from the area's trails

  // Incident probabilities are per tourist per minute, scaled by weather
  // severity: p_eff = p * (1 + weather_coupling * severity_score).
  double p_lost_per_min = 0.0012;
  double p_self_return = 0.7;
  double p_no_motion_per_min = 0.0015;
  double weather_coupling = 1.0;

  double group_fraction = 0.30;
  std::vector<int> group_sizes = {3, 4, 5};
  double p_gps = 0.38;
  double p_gps_refused = 0.15;

  int animal_count = 6;
  double animal_speed_min = 0.4, animal_speed_max = 1.2;
  double dangerous_fraction = 0.5;

  double junction_switch_p = 0.15;
  double special_pause_p = 0.5;
  double pause_min_s = 120.0, pause_max_s = 600.0;
  double speed_min = 1.0, speed_max = 1.6;
  double lost_offset_min = 20.0, lost_offset_max = 150.0;
  double lost_dwell_mean_s = 900.0;
  double rescue_wait_s = 1800.0;
  double no_motion_base_s = 900.0;
  double no_motion_extra_mean_s = 600.0;

  std::int64_t weather_interval_s = 60;
  std::int64_t geo_interval_s = 30;
  double fluct_period_s = 1800.0;
};

struct ScenarioSpec {
  int id = 0;
  std::string name;
  Season season = Season::Summer;
  Avalanche initial_avalanche = Avalanche::A1;
  SimParams params;
  std::vector<WeatherPhase> phases;       // ascending by start; first at 0
  std::vector<ScheduledControl> controls; // ascending by time
};

namespace scenario_detail {

inline WeatherReading read_factors(TableView& tv, const char* base_prefix) {
  WeatherReading r;
  r.wind_mps = tv.optional_double(std::string(base_prefix) + "wind", 0.0);
  r.visibility_m = tv.optional_double(std::string(base_prefix) + "visibility", 0.0);
  r.temperature_c = tv.optional_double(std::string(base_prefix) + "temperature", 0.0);
  r.rain_mmh = tv.optional_double(std::string(base_prefix) + "rain", 0.0);
  return r;
}

}  // namespace scenario_detail

inline ScenarioSpec parse_scenario(const std::string& text) {
  const ConfigTable root_table = parse_config(text);
  TableView root(root_table, "scenario-config");
  ScenarioSpec spec;
  std::vector<std::string> failures;

  {
    TableView s = root.table("scenario");
    spec.id = static_cast<int>(s.optional_int("id", 0));
    spec.name = s.optional_string("name", "unnamed scenario");
    try {
      spec.season = parse_season(s.require_string("season"));
      spec.initial_avalanche = parse_avalanche(s.optional_string("avalanche", "A1"));
    } catch (const VocabularyError& e) {
      s.fail(e.what());
    }
    s.done();
  }

  {
    TableView s = root.optional_table("sim");
    SimParams& p = spec.params;
    p.duration_s = s.optional_int("duration", p.duration_s);
    p.tick_s = s.optional_int("tick", p.tick_s);
    p.speedup = s.optional_double("speedup", p.speedup);
    p.peak_concurrent = s.optional_double("peak_concurrent", p.peak_concurrent);
    p.peak_hour = s.optional_double("peak_hour", p.peak_hour);
    p.sigma_hours = s.optional_double("sigma_hours", p.sigma_hours);
    p.mean_stay_s = s.optional_double("mean_stay", p.mean_stay_s);
    p.p_lost_per_min = s.optional_double("p_lost_per_min", p.p_lost_per_min);
    p.p_self_return = s.optional_double("p_self_return", p.p_self_return);
    p.p_no_motion_per_min = s.optional_double("p_no_motion_per_min", p.p_no_motion_per_min);
    p.weather_coupling = s.optional_double("weather_coupling", p.weather_coupling);
    p.group_fraction = s.optional_double("group_fraction", p.group_fraction);
    if (s.has_value("group_sizes")) {
      p.group_sizes.clear();
      for (const auto& v : s.require_array("group_sizes"))
        p.group_sizes.push_back(static_cast<int>(v.as_int()));
    }
    p.p_gps = s.optional_double("p_gps", p.p_gps);
    p.p_gps_refused = s.optional_double("p_gps_refused", p.p_gps_refused);
    p.animal_count = static_cast<int>(s.optional_int("animals", p.animal_count));
    if (s.has_value("animal_speed")) {
      const auto& arr = s.require_array("animal_speed");
      if (arr.size() != 2) s.fail("'animal_speed' must be [min, max]");
      p.animal_speed_min = arr[0].as_double();
      p.animal_speed_max = arr[1].as_double();
    }
    p.dangerous_fraction = s.optional_double("dangerous_fraction", p.dangerous_fraction);
    p.junction_switch_p = s.optional_double("junction_switch_p", p.junction_switch_p);
    p.special_pause_p = s.optional_double("special_pause_p", p.special_pause_p);
    if (s.has_value("pause_range")) {
      const auto& arr = s.require_array("pause_range");
      if (arr.size() != 2) s.fail("'pause_range' must be [min, max]");
      p.pause_min_s = arr[0].as_double();
      p.pause_max_s = arr[1].as_double();
    }
    if (s.has_value("speed_range")) {
      const auto& arr = s.require_array("speed_range");
      if (arr.size() != 2) s.fail("'speed_range' must be [min, max]");
      p.speed_min = arr[0].as_double();
      p.speed_max = arr[1].as_double();
    }
    if (s.has_value("lost_offset")) {
      const auto& arr = s.require_array("lost_offset");
      if (arr.size() != 2) s.fail("'lost_offset' must be [min, max]");
      p.lost_offset_min = arr[0].as_double();
      p.lost_offset_max = arr[1].as_double();
    }
    p.lost_dwell_mean_s = s.optional_double("lost_dwell_mean", p.lost_dwell_mean_s);
    p.rescue_wait_s = s.optional_double("rescue_wait", p.rescue_wait_s);
    p.no_motion_base_s = s.optional_double("no_motion_base", p.no_motion_base_s);
    p.no_motion_extra_mean_s = s.optional_double("no_motion_extra_mean", p.no_motion_extra_mean_s);
    p.weather_interval_s = s.optional_int("weather_interval", p.weather_interval_s);
    p.geo_interval_s = s.optional_int("geo_interval", p.geo_interval_s);
    p.fluct_period_s = s.optional_double("fluct_period", p.fluct_period_s);

    if (p.duration_s <= 0) failures.push_back("sim: duration must be positive");
    if (p.tick_s <= 0) failures.push_back("sim: tick must be positive");
    if (p.weather_interval_s % p.tick_s != 0 || p.geo_interval_s % p.tick_s != 0)
      failures.push_back("sim: reading intervals must be multiples of the tick");
    for (double prob : {p.p_lost_per_min, p.p_self_return, p.p_no_motion_per_min,
                        p.group_fraction, p.p_gps, p.p_gps_refused, p.junction_switch_p,
                        p.special_pause_p, p.dangerous_fraction})
      if (prob < 0.0 || prob > 1.0) {
        failures.push_back("sim: probabilities must lie in [0, 1]");
        break;
      }
    s.done();
  }

  for (TableView& tv : root.table_array("phase")) {
    WeatherPhase phase;
    phase.start = tv.optional_int("start", 0);
    phase.base = scenario_detail::read_factors(tv, "");
    phase.fluct.wind_mps = tv.optional_double("wind_fluct", 0.0);
    phase.fluct.visibility_m = tv.optional_double("visibility_fluct", 0.0);
    phase.fluct.temperature_c = tv.optional_double("temperature_fluct", 0.0);
    phase.fluct.rain_mmh = tv.optional_double("rain_fluct", 0.0);
    phase.ramp = tv.optional_bool("ramp", false);
    if (phase.ramp && (phase.fluct.wind_mps != 0 || phase.fluct.visibility_m != 0 ||
                       phase.fluct.temperature_c != 0 || phase.fluct.rain_mmh != 0))
      failures.push_back("phase at " + std::to_string(phase.start) +
                         ": ramp phases cannot carry fluctuation");
    tv.done();
    spec.phases.push_back(phase);
  }
  if (spec.phases.empty()) {
    failures.push_back("scenario needs at least one [[phase]]");
  } else {
    if (spec.phases.front().start != 0)
      failures.push_back("first phase must start at 0");
    if (spec.phases.front().ramp)
      failures.push_back("first phase cannot be a ramp");
    for (std::size_t i = 1; i < spec.phases.size(); ++i)
      if (spec.phases[i].start <= spec.phases[i - 1].start)
        failures.push_back("phases must have strictly ascending start times");
  }

  for (TableView& tv : root.table_array("control")) {
    ScheduledControl c;
    c.at = tv.require_int("at");
    try {
      if (tv.has_value("avalanche")) c.avalanche = parse_avalanche(tv.require_string("avalanche"));
    } catch (const VocabularyError& e) {
      tv.fail(e.what());
    }
    if (tv.has_value("alert_set")) c.alert_set = tv.require_string("alert_set");
    if (!c.avalanche && !c.alert_set)
      failures.push_back("control at " + std::to_string(c.at) +
                         ": needs 'avalanche' or 'alert_set'");
    tv.done();
    spec.controls.push_back(c);
  }
  std::stable_sort(spec.controls.begin(), spec.controls.end(),
                   [](const ScheduledControl& a, const ScheduledControl& b) { return a.at < b.at; });

  root.done();
  if (!failures.empty()) throw ValidationError(std::move(failures));
  return spec;
}

// ---------------------------------------------------------------------------
// Deterministic weather evaluation
// ---------------------------------------------------------------------------

namespace scenario_detail {

/// Base values of the schedule at time t (no fluctuation, no station term).
inline WeatherReading base_at(const ScenarioSpec& spec, std::int64_t t) {
  const auto& phases = spec.phases;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < phases.size(); ++i)
    if (phases[i].start <= t) idx = i;

  const WeatherPhase& phase = phases[idx];
  if (!phase.ramp) return phase.base;

  // Linear ramp from the previous phase's endpoint values to this phase's
  // targets, completing at the next phase start (or the end of the run).
  const WeatherReading& from = phases[idx - 1].base;
  const std::int64_t end =
      idx + 1 < phases.size() ? phases[idx + 1].start : spec.params.duration_s;
  const double u =
      end > phase.start
          ? std::clamp(static_cast<double>(t - phase.start) /
                           static_cast<double>(end - phase.start), 0.0, 1.0)
          : 1.0;
  WeatherReading r;
  r.wind_mps = from.wind_mps + (phase.base.wind_mps - from.wind_mps) * u;
  r.visibility_m = from.visibility_m + (phase.base.visibility_m - from.visibility_m) * u;
  r.temperature_c =
      from.temperature_c + (phase.base.temperature_c - from.temperature_c) * u;
  r.rain_mmh = from.rain_mmh + (phase.base.rain_mmh - from.rain_mmh) * u;
  return r;
}

/// Stable per-(seed, station, factor) phase offset in [0, 2pi) plus a small
/// spatial bias proportional to the fluctuation amplitude, so stations differ
/// while zero-fluctuation plateaus stay exactly at their configured values.
struct StationWeatherShape {
  double phi[4];
  double bias_unit[4];  // in [-0.5, 0.5], scaled by amplitude at use site
};

inline StationWeatherShape station_shape(std::uint64_t seed, const std::string& station_id) {
  StationWeatherShape shape{};
  const char* factor_names[4] = {"wind", "visibility", "temperature", "rain"};
  for (int f = 0; f < 4; ++f) {
    Rng r = Rng(seed ^ stable_hash(station_id)).fork(stable_hash(factor_names[f]));
    shape.phi[f] = r.uniform() * 2.0 * 3.14159265358979323846;
    shape.bias_unit[f] = r.uniform() - 0.5;
  }
  return shape;
}

}  // namespace scenario_detail

/// The reading station `station_id` reports at time t. Pure in all inputs:
/// the same (scenario, station, t, seed) always yields the same numbers.
inline WeatherReading weather_at(const ScenarioSpec& spec, const std::string& station_id,
                                 std::int64_t t, std::uint64_t seed) {
  using scenario_detail::base_at;
  const WeatherReading base = base_at(spec, t);

  const auto& phases = spec.phases;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < phases.size(); ++i)
    if (phases[i].start <= t) idx = i;
  const WeatherReading& amp = phases[idx].fluct;

  const auto shape = scenario_detail::station_shape(seed, station_id);
  const double omega = 2.0 * 3.14159265358979323846 /
                       std::max(spec.params.fluct_period_s, 1.0);
  auto wave = [&](double base_v, double amp_v, int f) {
    if (amp_v == 0.0) return base_v;
    return base_v + amp_v * std::sin(omega * static_cast<double>(t) + shape.phi[f]) +
           amp_v * 0.5 * shape.bias_unit[f];
  };
  WeatherReading r;
  r.wind_mps = std::max(0.0, wave(base.wind_mps, amp.wind_mps, 0));
  r.visibility_m = std::max(1.0, wave(base.visibility_m, amp.visibility_m, 1));
  r.temperature_c = wave(base.temperature_c, amp.temperature_c, 2);
  r.rain_mmh = std::max(0.0, wave(base.rain_mmh, amp.rain_mmh, 3));
  return r;
}

/// Area-level severity score at time t: how many tag levels above benign the
/// four factors sit, 0..8, computed from the schedule's base values. Drives
/// the weather-to-incident coupling.
inline int weather_severity(const ScenarioSpec& spec, const TagThresholds& thresholds,
                            std::int64_t t) {
  const WeatherReading base = scenario_detail::base_at(spec, t);
  const WeatherTags tags = a2_tag_weather(base, thresholds, spec.season);
  return (static_cast<int>(tags.wind) - 1) + (static_cast<int>(tags.fog) - 1) +
         (static_cast<int>(tags.temperature) - 1) + (static_cast<int>(tags.rain) - 1);
}

}  // namespace trailwatch
