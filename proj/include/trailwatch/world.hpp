#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trailwatch/config.hpp"
#include "trailwatch/geo.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

struct SpecialPlace {
  GeoPoint center;
  double radius = 0.0;  // meters; dwelling inside is expected behavior
};

struct Trail {
  std::string id;  // H1, H2, ...
  TrailPolyline polyline;
  Difficulty difficulty = Difficulty::D1;
  std::vector<double> entry_points;  // arclengths where tourists enter/exit
  std::vector<SpecialPlace> special_places;
};

struct WeatherStation {
  std::string id;
  GeoPoint location;
  double influence_radius = 0.0;
};

struct BtsStation {
  std::string id;
  GeoPoint location;
  double max_range = 0.0;
  double path_loss_exponent = 2.5;
  double noise_sigma = 0.0;   // dB, applied by the simulator
  double rssi_at_1m = -40.0;  // dBm reference power of the log-distance model
};

enum class PhoneMode : std::uint8_t { GpsConsent, BtsOnly, GpsRefused };
enum class TouristState : std::uint8_t {
  Hiking,
  Lost,
  NoMotion,
  Rescued,
  Evacuating,
  Departed,
};

struct Tourist {
  int id = 0;
  PhoneMode phone_mode = PhoneMode::BtsOnly;
  std::optional<int> group_id;
  double speed = 1.3;  // m/s along the trail
  std::string trail_id;
  double arclength = 0.0;
  int direction = 1;  // +1 toward increasing arclength
  TouristState state = TouristState::Hiking;
  std::int64_t entered_at = 0;
  std::optional<std::int64_t> departed_at;
  GeoPoint off_trail_position;  // meaningful only while Lost
};

struct Group {
  int id = 0;
  int leader_id = 0;  // first listed member unless overridden
  std::vector<int> member_ids;
};

struct Animal {
  int id = 0;
  GeoPoint location;
  double speed = 0.8;      // m/s
  double heading = 0.0;    // radians
  bool dangerous = true;   // dangerous animals are the monitored ones
  bool gps_equipped = true;
};

/// Day/night and report-time bookkeeping. The environment clock advances
/// `clock_hours_per_sim_hour` per simulated hour so one short run can span a
/// full day/night cycle; all cadences elsewhere are plain simulated seconds.
struct Schedule {
  double start_clock_hour = 5.0;
  double clock_hours_per_sim_hour = 30.0;
  double sunrise_hour = 6.0;
  double sunset_hour = 20.0;
  int base_day = 19, base_month = 9, base_year = 2021;

  double clock_hours_at(std::int64_t sim_s) const {
    return start_clock_hour + static_cast<double>(sim_s) * clock_hours_per_sim_hour / 3600.0;
  }

  DayNight day_night_at(std::int64_t sim_s) const {
    return day_night_clock(std::fmod(clock_hours_at(sim_s), 24.0));
  }

  /// Half-open [sunrise, sunset): sunset itself is already Night.
  DayNight day_night_clock(double hour_of_day) const {
    return (hour_of_day >= sunrise_hour && hour_of_day < sunset_hour) ? DayNight::Day
                                                                      : DayNight::Night;
  }

  /// "(19.09.2021,14.30)" — date.month.year, hour.minute.
  std::string format_timestamp(std::int64_t sim_s) const {
    double hours = clock_hours_at(sim_s);
    int day = base_day, month = base_month, year = base_year;
    while (hours >= 24.0) {
      hours -= 24.0;
      advance_day(&day, &month, &year);
    }
    const int h = static_cast<int>(hours);
    int m = static_cast<int>(std::lround((hours - h) * 60.0)) ;
    char buf[40];
    if (m >= 60) m = 59;  // keep the rounded minute inside the hour
    std::snprintf(buf, sizeof(buf), "(%02d.%02d.%04d,%02d.%02d)", day, month, year, h, m);
    return buf;
  }

 private:
  static void advance_day(int* day, int* month, int* year) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int len = lengths[*month - 1];
    const bool leap = (*year % 4 == 0 && *year % 100 != 0) || *year % 400 == 0;
    if (*month == 2 && leap) len = 29;
    if (++*day > len) {
      *day = 1;
      if (++*month > 12) {
        *month = 1;
        ++*year;
      }
    }
  }
};

/// Tag binning thresholds. All bins are half-open on the severe side: a value
/// exactly at a boundary takes the more severe tag for ascending factors and
/// the milder one for the inverted/descending factors (see tag_weather).
struct TagThresholds {
  double wind_w2 = 8.0, wind_w3 = 17.0;            // m/s, ascending
  double vis_f2 = 1000.0, vis_f3 = 200.0;          // meters, inverted
  double temp_summer_t2 = 10.0, temp_summer_t3 = 0.0;    // °C, descending
  double temp_winter_t2 = -5.0, temp_winter_t3 = -15.0;  // °C, descending
  double rain_r2 = 2.0, rain_r3 = 8.0;             // mm/h, ascending
};

struct PipelineThresholds {
  double off_trail = 50.0;          // meters from the assigned trail
  double accuracy_mismatch = 100.0; // third-station disagreement, meters
  double group_radius = 100.0;      // co-member proximity for fix improvement
  double station_band = 0.10;       // comparability band for station choice
  double idle_displacement = 20.0;  // below this per cycle counts as idle
  double entry_region = 50.0;       // radius around entry points for departures
  std::int64_t departure_timeout = 600;  // silent seconds before departure
};

struct DetectorThresholds {
  double group_distance = 200.0;      // meters from leader
  double animal_distance = 50.0;      // meters to a dangerous animal
  std::int64_t no_motion_seconds = 900;
};

struct AreaConfig {
  std::string name;
  GeodeticOrigin origin;
  double bounds[4] = {0, 0, 0, 0};  // xmin, ymin, xmax, ymax
  Season season = Season::Summer;
  Schedule schedule;
  TagThresholds tags;
  PipelineThresholds pipeline;
  DetectorThresholds detectors;
  std::vector<Trail> trails;
  std::vector<WeatherStation> weather_stations;
  std::vector<BtsStation> bts_stations;
  std::vector<std::string> warnings;  // non-fatal validation findings

  const Trail* find_trail(const std::string& id) const {
    auto it = trail_index_.find(id);
    return it == trail_index_.end() ? nullptr : &trails[it->second];
  }

  const Trail& trail(const std::string& id) const {
    const Trail* t = find_trail(id);
    if (!t) throw NotFoundError("unknown trail id '" + id + "'");
    return *t;
  }

  std::size_t trail_pos(const std::string& id) const {
    auto it = trail_index_.find(id);
    if (it == trail_index_.end()) throw NotFoundError("unknown trail id '" + id + "'");
    return it->second;
  }

  bool in_bounds(const GeoPoint& p) const {
    return p.x >= bounds[0] && p.y >= bounds[1] && p.x <= bounds[2] && p.y <= bounds[3];
  }

  void rebuild_indexes() {
    trail_index_.clear();
    for (std::size_t i = 0; i < trails.size(); ++i) trail_index_[trails[i].id] = i;
  }

 private:
  std::map<std::string, std::size_t> trail_index_;
};

/// Crossing of two distinct trails; tourists may switch routes here.
struct Junction {
  std::size_t trail_a = 0, trail_b = 0;
  double arclength_a = 0.0, arclength_b = 0.0;
  GeoPoint point;
};

inline std::vector<Junction> find_junctions(const AreaConfig& area) {
  std::vector<Junction> out;
  for (std::size_t a = 0; a < area.trails.size(); ++a) {
    const auto& va = area.trails[a].polyline.vertices();
    for (std::size_t b = a + 1; b < area.trails.size(); ++b) {
      const auto& vb = area.trails[b].polyline.vertices();
      for (std::size_t i = 0; i + 1 < va.size(); ++i) {
        for (std::size_t j = 0; j + 1 < vb.size(); ++j) {
          GeoPoint w;
          if (!segments_intersect(va[i], va[i + 1], vb[j], vb[j + 1], &w)) continue;
          Junction jn;
          jn.trail_a = a;
          jn.trail_b = b;
          jn.point = w;
          jn.arclength_a = area.trails[a].polyline.project(w).arclength;
          jn.arclength_b = area.trails[b].polyline.project(w).arclength;
          out.push_back(jn);
        }
      }
    }
  }
  return out;
}

namespace world_detail {

inline GeoPoint point_from(const ConfigArray& arr, TableView& view, const char* key) {
  if (arr.size() != 2 || (!arr[0].is_double() && !arr[0].is_int()) ||
      (!arr[1].is_double() && !arr[1].is_int()))
    view.fail(std::string("'") + key + "' must be [x, y]");
  return {arr[0].as_double(), arr[1].as_double()};
}

inline std::string parse_date(const std::string& s, Schedule* sch, TableView& view) {
  int d, m, y;
  if (std::sscanf(s.c_str(), "%d.%d.%d", &d, &m, &y) != 3 || d < 1 || d > 31 || m < 1 ||
      m > 12 || y < 1900)
    view.fail("base_date must look like '19.09.2021'");
  sch->base_day = d;
  sch->base_month = m;
  sch->base_year = y;
  return s;
}

}  // namespace world_detail

/// Parse + validate an area description. Schema errors (unknown keys, wrong
/// types) throw ConfigError with the offending path; consistency violations
/// are collected and thrown together as one ValidationError.
inline AreaConfig load_area(const std::string& text) {
  const ConfigTable root_table = parse_config(text);
  TableView root(root_table, "area-config");
  AreaConfig area;
  std::vector<std::string> failures;

  {
    TableView a = root.table("area");
    area.name = a.optional_string("name", "unnamed area");
    area.origin.lat_deg = a.optional_double("origin_lat", 49.573);
    area.origin.lon_deg = a.optional_double("origin_lon", 19.529);
    const ConfigArray& b = a.require_array("bounds");
    if (b.size() != 4) a.fail("'bounds' must be [xmin, ymin, xmax, ymax]");
    for (int i = 0; i < 4; ++i) area.bounds[i] = b[i].as_double();
    if (area.bounds[2] <= area.bounds[0] || area.bounds[3] <= area.bounds[1])
      failures.push_back("area bounds are empty or inverted");
    try {
      area.season = parse_season(a.require_string("season"));
    } catch (const VocabularyError& e) {
      a.fail(e.what());
    }
    a.done();
  }

  {
    TableView s = root.optional_table("schedule");
    area.schedule.start_clock_hour = s.optional_double("start_clock_hour", 5.0);
    area.schedule.clock_hours_per_sim_hour = s.optional_double("clock_hours_per_sim_hour", 30.0);
    area.schedule.sunrise_hour = s.optional_double("sunrise_hour", 6.0);
    area.schedule.sunset_hour = s.optional_double("sunset_hour", 20.0);
    if (s.has_value("base_date"))
      world_detail::parse_date(s.require_string("base_date"), &area.schedule, s);
    if (area.schedule.sunrise_hour >= area.schedule.sunset_hour)
      failures.push_back("schedule: sunrise must precede sunset");
    s.done();
  }

  {
    TableView t = root.optional_table("thresholds");
    auto pair = [&](const char* key, double d2, double d3, double* lo, double* hi) {
      if (!t.has_value(key)) {
        *lo = d2;
        *hi = d3;
        return;
      }
      const ConfigArray& arr = t.require_array(key);
      if (arr.size() != 2) t.fail(std::string("'") + key + "' must be [level2, level3]");
      *lo = arr[0].as_double();
      *hi = arr[1].as_double();
    };
    auto& tg = area.tags;
    pair("wind", 8.0, 17.0, &tg.wind_w2, &tg.wind_w3);
    pair("visibility", 1000.0, 200.0, &tg.vis_f2, &tg.vis_f3);
    pair("temperature_summer", 10.0, 0.0, &tg.temp_summer_t2, &tg.temp_summer_t3);
    pair("temperature_winter", -5.0, -15.0, &tg.temp_winter_t2, &tg.temp_winter_t3);
    pair("rain", 2.0, 8.0, &tg.rain_r2, &tg.rain_r3);
    if (tg.wind_w2 >= tg.wind_w3) failures.push_back("thresholds: wind levels not ascending");
    if (tg.vis_f2 <= tg.vis_f3) failures.push_back("thresholds: visibility levels not descending");
    if (tg.rain_r2 >= tg.rain_r3) failures.push_back("thresholds: rain levels not ascending");
    if (tg.temp_summer_t2 <= tg.temp_summer_t3 || tg.temp_winter_t2 <= tg.temp_winter_t3)
      failures.push_back("thresholds: temperature levels not descending");

    auto& pl = area.pipeline;
    pl.off_trail = t.optional_double("off_trail", 50.0);
    pl.accuracy_mismatch = t.optional_double("accuracy_mismatch", 100.0);
    pl.group_radius = t.optional_double("group_radius", 100.0);
    pl.station_band = t.optional_double("station_band", 0.10);
    pl.idle_displacement = t.optional_double("idle_displacement", 20.0);
    pl.entry_region = t.optional_double("entry_region", 50.0);
    pl.departure_timeout = t.optional_int("departure_timeout", 600);
    t.done();
  }

  {
    TableView d = root.optional_table("detectors");
    area.detectors.group_distance = d.optional_double("group_distance", 200.0);
    area.detectors.animal_distance = d.optional_double("animal_distance", 50.0);
    area.detectors.no_motion_seconds = d.optional_int("no_motion_seconds", 900);
    d.done();
  }

  for (TableView& tv : root.table_array("trail")) {
    Trail trail{std::string(), TrailPolyline({{0, 0}, {1, 0}}), Difficulty::D1, {}, {}};
    trail.id = tv.require_string("id");
    try {
      trail.difficulty = parse_difficulty(tv.require_string("difficulty"));
    } catch (const VocabularyError& e) {
      failures.push_back(tv.path() + ": " + e.what());
    }
    std::vector<GeoPoint> pts;
    for (const auto& v : tv.require_array("points")) {
      if (!v.is_array()) tv.fail("'points' must be an array of [x, y] pairs");
      pts.push_back(world_detail::point_from(v.as_array(), tv, "points"));
    }
    bool polyline_ok = false;
    try {
      trail.polyline = TrailPolyline(pts);
      polyline_ok = true;
    } catch (const std::invalid_argument& e) {
      failures.push_back(tv.path() + " (" + trail.id + "): " + e.what());
    }
    if (tv.has_value("entries")) {
      for (const auto& v : tv.require_array("entries")) {
        double s = v.as_double();
        if (polyline_ok && s == -1.0) s = trail.polyline.length();  // -1 = far end
        trail.entry_points.push_back(s);
        if (polyline_ok && (s < 0.0 || s > trail.polyline.length()))
          failures.push_back(tv.path() + " (" + trail.id + "): entry arclength " +
                             std::to_string(s) + " outside [0, length]");
      }
    }
    if (tv.has_value("special_places")) {
      for (const auto& v : tv.require_array("special_places")) {
        if (!v.is_array() || v.as_array().size() != 3)
          tv.fail("'special_places' entries must be [x, y, radius]");
        const auto& a = v.as_array();
        SpecialPlace sp{{a[0].as_double(), a[1].as_double()}, a[2].as_double()};
        if (sp.radius <= 0)
          failures.push_back(tv.path() + " (" + trail.id + "): special place radius must be > 0");
        trail.special_places.push_back(sp);
      }
    }
    if (polyline_ok && area.bounds[2] > area.bounds[0]) {
      for (const auto& p : trail.polyline.vertices())
        if (!area.in_bounds(p)) {
          failures.push_back(tv.path() + " (" + trail.id + "): vertex outside area bounds");
          break;
        }
    }
    tv.done();
    area.trails.push_back(std::move(trail));
  }
  if (area.trails.empty()) failures.push_back("no trails configured");
  {
    std::map<std::string, int> seen;
    for (const auto& t : area.trails)
      if (++seen[t.id] == 2) failures.push_back("duplicate trail id '" + t.id + "'");
  }
  bool any_entry = false;
  for (const auto& t : area.trails) any_entry = any_entry || !t.entry_points.empty();
  if (!area.trails.empty() && !any_entry)
    failures.push_back("no trail has an entry point; tourists cannot arrive");

  for (TableView& tv : root.table_array("weather_station")) {
    WeatherStation ws;
    ws.id = tv.require_string("id");
    ws.location = world_detail::point_from(tv.require_array("location"), tv, "location");
    ws.influence_radius = tv.require_double("influence_radius");
    if (ws.influence_radius <= 0)
      failures.push_back(tv.path() + " (" + ws.id + "): influence_radius must be > 0");
    tv.done();
    area.weather_stations.push_back(ws);
  }
  if (area.weather_stations.empty()) failures.push_back("at least one weather station required");

  for (TableView& tv : root.table_array("bts_station")) {
    BtsStation bs;
    bs.id = tv.require_string("id");
    bs.location = world_detail::point_from(tv.require_array("location"), tv, "location");
    bs.max_range = tv.require_double("max_range");
    bs.path_loss_exponent = tv.optional_double("path_loss_exponent", 2.5);
    bs.noise_sigma = tv.optional_double("noise_sigma", 0.0);
    bs.rssi_at_1m = tv.optional_double("rssi_at_1m", -40.0);
    if (bs.max_range <= 0) failures.push_back(tv.path() + ": max_range must be > 0");
    if (bs.path_loss_exponent < 1.0)
      failures.push_back(tv.path() + ": path_loss_exponent must be >= 1");
    tv.done();
    area.bts_stations.push_back(bs);
  }

  root.done();
  area.rebuild_indexes();

  // Coverage probe: trilateration needs two reachable BTS stations anywhere a
  // tourist can stand. Thin coverage is survivable (single-station fallback),
  // so it is reported as a warning rather than a failure.
  for (const auto& t : area.trails) {
    if (t.polyline.length() <= 0 || area.bts_stations.empty()) continue;
    double worst_s = -1;
    int worst_n = 1000;
    for (double s = 0.0; s <= t.polyline.length(); s += 50.0) {
      const GeoPoint p = t.polyline.position_at(s);
      int n = 0;
      for (const auto& b : area.bts_stations)
        if (distance(p, b.location) <= b.max_range) ++n;
      if (n < worst_n) {
        worst_n = n;
        worst_s = s;
      }
    }
    if (worst_n < 2)
      area.warnings.push_back("trail " + t.id + ": only " + std::to_string(worst_n) +
                              " BTS station(s) reachable near arclength " +
                              std::to_string(worst_s));
  }

  if (!failures.empty()) throw ValidationError(std::move(failures));
  return area;
}

/// Free-function form of the schedule query for symmetry with the rest of the
/// pipeline code.
inline DayNight day_night(std::int64_t sim_s, const AreaConfig& area) {
  return area.schedule.day_night_at(sim_s);
}

}  // namespace trailwatch
