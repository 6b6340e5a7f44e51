#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/geo.hpp"
#include "trailwatch/tags.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

// ---------------------------------------------------------------------------
// Geolocation fusion (stage one of the preprocessing layer)
// ---------------------------------------------------------------------------

enum class FixSource : std::uint8_t { Gps, BtsTrilateration, GroupImproved };

inline const char* to_string(FixSource s) {
  switch (s) {
    case FixSource::Gps: return "GPS";
    case FixSource::BtsTrilateration: return "BTS";
    case FixSource::GroupImproved: return "GROUP";
  }
  return "?";
}

/// Estimated position of one tourist at one emission instant.
struct GeoFix {
  std::string tourist_id;
  GeoPoint point;
  FixSource source = FixSource::BtsTrilateration;
  double accuracy = 0.0;  // meters, estimated; satellite fixes are tighter
  std::int64_t timestamp = 0;
};

struct LowAccuracyEvent {
  std::string tourist_id;
  std::string station_id;
  double mismatch = 0.0;  // meters beyond what the third station implies
  std::int64_t timestamp = 0;
};

/// One station's view of one phone at one instant.
struct StationSignal {
  const BtsStation* station = nullptr;
  double rssi_dbm = 0.0;
};

/// Log-distance path loss, the monotone signal model used on both sides:
/// rssi(d) = rssi_at_1m - 10 * exponent * log10(d).
inline double rssi_from_distance(const BtsStation& s, double d) {
  return s.rssi_at_1m - 10.0 * s.path_loss_exponent * std::log10(std::max(d, 1.0));
}

inline double distance_from_rssi(const BtsStation& s, double rssi) {
  return std::pow(10.0, (s.rssi_at_1m - rssi) / (10.0 * s.path_loss_exponent));
}

/// Default accuracy estimates per source; the invariant is only the ordering
/// (satellite strictly tighter than tower-based).
constexpr double kGpsAccuracy = 5.0;
constexpr double kBtsAccuracy = 50.0;

struct GeolocationResult {
  GeoFix fix;
  std::optional<LowAccuracyEvent> low_accuracy;
};

/// Position fusion for one tourist. A satellite fix always wins. Otherwise
/// the two strongest stations' distance circles are intersected and the
/// third-strongest station (or the previous fix when only two stations
/// heard the phone) picks between the two candidates. Disagreement between
/// the chosen fix and the third station's implied distance beyond
/// `accuracy_mismatch` is flagged, not fixed.
inline GeolocationResult a1_geolocate(const std::string& tourist_id,
                                      std::vector<StationSignal> signals,
                                      const std::optional<GeoPoint>& gps,
                                      const std::optional<GeoFix>& previous,
                                      const PipelineThresholds& thresholds,
                                      std::int64_t timestamp) {
  GeolocationResult out;
  if (gps) {
    out.fix = {tourist_id, *gps, FixSource::Gps, kGpsAccuracy, timestamp};
    return out;
  }
  if (signals.size() < 2)
    throw UnlocatableError("tourist " + tourist_id + ": " +
                           std::to_string(signals.size()) +
                           " station measurement(s) and no satellite fix");

  // Strongest signal first; station id breaks ties so reordering upstream
  // cannot change the answer.
  std::sort(signals.begin(), signals.end(), [](const StationSignal& a, const StationSignal& b) {
    if (a.rssi_dbm != b.rssi_dbm) return a.rssi_dbm > b.rssi_dbm;
    return a.station->id < b.station->id;
  });

  const BtsStation& s1 = *signals[0].station;
  const BtsStation& s2 = *signals[1].station;
  const double d1 = distance_from_rssi(s1, signals[0].rssi_dbm);
  const double d2 = distance_from_rssi(s2, signals[1].rssi_dbm);

  std::vector<GeoPoint> candidates = circle_intersection(s1.location, d1, s2.location, d2);
  if (candidates.empty()) {
    // Noise pushed the circles apart (or one inside the other): fall back to
    // the point between the centers split by the radius ratio.
    const double span = distance(s1.location, s2.location);
    const double t = span > 0 ? std::clamp(d1 / std::max(d1 + d2, 1e-9), 0.0, 1.0) : 0.5;
    candidates.push_back({s1.location.x + (s2.location.x - s1.location.x) * t,
                          s1.location.y + (s2.location.y - s1.location.y) * t});
  }

  GeoPoint chosen = candidates[0];
  if (candidates.size() == 2) {
    if (signals.size() >= 3) {
      const BtsStation& s3 = *signals[2].station;
      const double d3 = distance_from_rssi(s3, signals[2].rssi_dbm);
      const double err0 = std::abs(distance(candidates[0], s3.location) - d3);
      const double err1 = std::abs(distance(candidates[1], s3.location) - d3);
      chosen = err1 < err0 ? candidates[1] : candidates[0];
    } else if (previous) {
      const double e0 = distance(candidates[0], previous->point);
      const double e1 = distance(candidates[1], previous->point);
      chosen = e1 < e0 ? candidates[1] : candidates[0];
    }
  }

  out.fix = {tourist_id, chosen, FixSource::BtsTrilateration, kBtsAccuracy, timestamp};
  if (signals.size() >= 3) {
    const BtsStation& s3 = *signals[2].station;
    const double d3 = distance_from_rssi(s3, signals[2].rssi_dbm);
    const double mismatch = std::abs(distance(chosen, s3.location) - d3);
    if (mismatch > thresholds.accuracy_mismatch)
      out.low_accuracy = LowAccuracyEvent{tourist_id, s3.id, mismatch, timestamp};
  }
  return out;
}

/// Tower-based fix pulled onto the trail using co-group members that carry
/// satellite fixes nearby: the corrected point sits at the mean of the
/// member arclengths (own projection included), with half the uncertainty.
inline GeoFix improve_with_group(const GeoFix& bts_fix, const Trail& trail,
                                 double own_arclength,
                                 const std::vector<double>& gps_member_arclengths) {
  double sum = own_arclength;
  for (double s : gps_member_arclengths) sum += s;
  const double mean = sum / static_cast<double>(1 + gps_member_arclengths.size());
  const double clamped = std::clamp(mean, 0.0, trail.polyline.length());
  GeoFix out = bts_fix;
  out.point = trail.polyline.position_at(clamped);
  out.source = FixSource::GroupImproved;
  out.accuracy = bts_fix.accuracy / 2.0;
  return out;
}

// ---------------------------------------------------------------------------
// Route assignment
// ---------------------------------------------------------------------------

struct RouteAssignment {
  std::string trail_id;
  double arclength = 0.0;
  bool off_trail = false;
  double distance_to_trail = 0.0;
};

/// Nearest-projection assignment with hysteresis: while the previous trail is
/// still within the off-trail threshold the tourist stays assigned to it even
/// if another trail is marginally closer (junction stability). A tourist
/// outside the threshold everywhere keeps the previous route when one is
/// known: that is the route they strayed from.
inline RouteAssignment assign_route(const GeoPoint& p, const AreaConfig& area,
                                    const std::optional<std::string>& previous_trail,
                                    double off_trail_threshold) {
  if (area.trails.empty()) throw NotFoundError("no trails configured");

  const Trail* best = nullptr;
  Projection best_proj{};
  for (const Trail& t : area.trails) {
    const Projection proj = t.polyline.project(p);
    if (!best || proj.distance < best_proj.distance) {
      best = &t;
      best_proj = proj;
    }
  }

  if (previous_trail) {
    const Trail* prev = area.find_trail(*previous_trail);
    if (prev) {
      const Projection proj = prev->polyline.project(p);
      if (proj.distance <= off_trail_threshold)
        return {prev->id, proj.arclength, false, proj.distance};
      if (best_proj.distance > off_trail_threshold)
        return {prev->id, proj.arclength, true, proj.distance};
    }
  }
  return {best->id, best_proj.arclength, best_proj.distance > off_trail_threshold,
          best_proj.distance};
}

// ---------------------------------------------------------------------------
// Weather tagging (stage two)
// ---------------------------------------------------------------------------

struct WeatherReading {
  double wind_mps = 0.0;
  double visibility_m = 0.0;
  double temperature_c = 0.0;
  double rain_mmh = 0.0;
};

/// Three-level binning per factor. Ascending factors (wind, rain) use
/// half-open [lo, hi): a value exactly at a boundary takes the severer tag.
/// Descending factors (visibility, temperature) mirror that: the boundary
/// value keeps the milder tag.
inline WeatherTags a2_tag_weather(const WeatherReading& r, const TagThresholds& th,
                                  Season season) {
  const double checks[4] = {r.wind_mps, r.visibility_m, r.temperature_c, r.rain_mmh};
  for (double v : checks)
    if (!std::isfinite(v)) throw DataError("non-finite weather reading");

  WeatherTags tags;
  tags.wind = r.wind_mps >= th.wind_w3   ? WindTag::W3
              : r.wind_mps >= th.wind_w2 ? WindTag::W2
                                         : WindTag::W1;
  tags.fog = r.visibility_m >= th.vis_f2   ? FogTag::F1
             : r.visibility_m >= th.vis_f3 ? FogTag::F2
                                           : FogTag::F3;
  const double t2 = season == Season::Summer ? th.temp_summer_t2 : th.temp_winter_t2;
  const double t3 = season == Season::Summer ? th.temp_summer_t3 : th.temp_winter_t3;
  tags.temperature = r.temperature_c >= t2   ? TempTag::T1
                     : r.temperature_c >= t3 ? TempTag::T2
                                             : TempTag::T3;
  tags.rain = r.rain_mmh >= th.rain_r3   ? RainTag::R3
              : r.rain_mmh >= th.rain_r2 ? RainTag::R2
                                         : RainTag::R1;
  return tags;
}

// ---------------------------------------------------------------------------
// Station selection
// ---------------------------------------------------------------------------

/// Trail each station serves: the one its location projects closest to.
/// Computed once per area; ties go to the lower trail index.
inline std::vector<std::size_t> station_home_trails(const AreaConfig& area) {
  std::vector<std::size_t> home;
  home.reserve(area.weather_stations.size());
  for (const WeatherStation& ws : area.weather_stations) {
    std::size_t best_idx = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < area.trails.size(); ++i) {
      const double d = area.trails[i].polyline.project(ws.location).distance;
      if (d < best_d) {
        best_d = d;
        best_idx = i;
      }
    }
    home.push_back(best_idx);
  }
  return home;
}

/// Rule cascade for the reading a tourist's assessment uses:
///   1. only stations whose influence circle covers the tourist (fall back to
///      the global nearest when none does),
///   2. among those, stations serving the tourist's trail beat the rest,
///   3. nearest wins; when the top two are within the comparability band the
///      one ahead in the travel direction is taken.
inline std::string select_station(const AreaConfig& area,
                                  const std::vector<std::size_t>& home_trails,
                                  const GeoPoint& tourist, std::size_t trail_index,
                                  double arclength, int direction, double band) {
  if (area.weather_stations.empty()) throw NotFoundError("no weather stations configured");

  struct Entry {
    std::size_t idx;
    double dist;
  };
  std::vector<Entry> pool;
  for (std::size_t i = 0; i < area.weather_stations.size(); ++i) {
    const double d = distance(tourist, area.weather_stations[i].location);
    if (d <= area.weather_stations[i].influence_radius) pool.push_back({i, d});
  }
  if (pool.empty()) {
    // Global nearest fallback, deterministic on ties.
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < area.weather_stations.size(); ++i) {
      const double d = distance(tourist, area.weather_stations[i].location);
      if (d < best_d || (d == best_d && area.weather_stations[i].id <
                                            area.weather_stations[best].id)) {
        best = i;
        best_d = d;
      }
    }
    return area.weather_stations[best].id;
  }

  std::vector<Entry> on_trail;
  for (const Entry& e : pool)
    if (home_trails[e.idx] == trail_index) on_trail.push_back(e);
  std::vector<Entry>& use = on_trail.empty() ? pool : on_trail;

  std::sort(use.begin(), use.end(), [&](const Entry& a, const Entry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return area.weather_stations[a.idx].id < area.weather_stations[b.idx].id;
  });

  if (use.size() >= 2) {
    const Entry& first = use[0];
    const Entry& second = use[1];
    const double larger = std::max(first.dist, second.dist);
    if (larger > 0 && std::abs(first.dist - second.dist) < band * larger) {
      // Comparable distances: prefer the station ahead along the walk.
      const TrailPolyline& line = area.trails[trail_index].polyline;
      auto ahead = [&](const Entry& e) {
        const double s = line.project(area.weather_stations[e.idx].location).arclength;
        return direction >= 0 ? s >= arclength : s <= arclength;
      };
      const bool a0 = ahead(first), a1 = ahead(second);
      if (a1 && !a0) return area.weather_stations[second.idx].id;
    }
  }
  return area.weather_stations[use[0].idx].id;
}

// ---------------------------------------------------------------------------
// Arrival and departure tracking
// ---------------------------------------------------------------------------

struct ArrivalEvent {
  std::string tourist_id;
  std::int64_t timestamp = 0;
};

struct DepartureEvent {
  std::string tourist_id;
  std::int64_t timestamp = 0;
  bool lost_signal = false;  // silence ended mid-trail rather than at an entry
};

/// Presence bookkeeping from the fix stream alone: first in-bounds fix is an
/// arrival; prolonged silence is a departure, classified by where the last
/// fix sat. Silence is the only departure signal available to the support
/// system, so clean exits are recognized by their location.
class ArrivalTracker {
 public:
  std::optional<ArrivalEvent> on_fix(const GeoFix& fix, const AreaConfig& area) {
    auto it = tracked_.find(fix.tourist_id);
    if (it == tracked_.end()) {
      if (!area.in_bounds(fix.point)) return std::nullopt;
      tracked_.emplace(fix.tourist_id, Presence{fix.point, fix.timestamp});
      return ArrivalEvent{fix.tourist_id, fix.timestamp};
    }
    it->second.last_point = fix.point;
    it->second.last_seen = fix.timestamp;
    return std::nullopt;
  }

  /// Tourists silent for longer than the timeout, in id order.
  std::vector<DepartureEvent> sweep(std::int64_t now, const AreaConfig& area) {
    std::vector<DepartureEvent> out;
    for (auto it = tracked_.begin(); it != tracked_.end();) {
      if (now - it->second.last_seen > area.pipeline.departure_timeout) {
        out.push_back({it->first, it->second.last_seen,
                       !near_entry(it->second.last_point, area)});
        it = tracked_.erase(it);
      } else {
        ++it;
      }
    }
    return out;
  }

  /// End-of-run closure: the stream is over, so anyone whose last fix sat in
  /// an entry region left cleanly; everyone else stays current.
  std::vector<DepartureEvent> finish(const AreaConfig& area) {
    std::vector<DepartureEvent> out;
    for (auto it = tracked_.begin(); it != tracked_.end();) {
      if (near_entry(it->second.last_point, area)) {
        out.push_back({it->first, it->second.last_seen, false});
        it = tracked_.erase(it);
      } else {
        ++it;
      }
    }
    return out;
  }

  std::size_t active() const { return tracked_.size(); }
  bool is_tracked(const std::string& id) const { return tracked_.count(id) != 0; }

  static bool near_entry(const GeoPoint& p, const AreaConfig& area) {
    for (const Trail& t : area.trails)
      for (double s : t.entry_points)
        if (distance(p, t.polyline.position_at(std::clamp(s, 0.0, t.polyline.length()))) <=
            area.pipeline.entry_region)
          return true;
    return false;
  }

 private:
  struct Presence {
    GeoPoint last_point;
    std::int64_t last_seen = 0;
  };
  std::map<std::string, Presence> tracked_;  // ordered: deterministic sweeps
};

}  // namespace trailwatch
