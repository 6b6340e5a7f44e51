#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/pipeline.hpp"
#include "trailwatch/repository.hpp"
#include "trailwatch/rng.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

// ---------------------------------------------------------------------------
// Scalar statistics
// ---------------------------------------------------------------------------

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw UndefinedStatError("correlation needs series of equal length");
  const std::size_t n = xs.size();
  if (n < 2) throw UndefinedStatError("correlation needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedStatError("correlation undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct SummaryStats {
  double mean = 0, min = 0, max = 0, stddev = 0;  // population standard deviation
};

inline SummaryStats summarize(const std::vector<double>& v) {
  if (v.empty()) throw UndefinedStatError("summary of an empty series");
  SummaryStats s;
  s.min = v[0];
  s.max = v[0];
  for (double x : v) {
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(v.size()));
  return s;
}

struct SolveTimeStats {
  double mean_ms = 0, stddev_ms = 0;
};

inline SolveTimeStats solve_time_stats(const ReasoningCounters& c) {
  SolveTimeStats s;
  if (c.solver_calls == 0) return s;
  const double n = static_cast<double>(c.solver_calls);
  const double mean_ns = static_cast<double>(c.solve_ns_total) / n;
  const double var_ns = std::max(0.0, c.solve_ns_sq / n - mean_ns * mean_ns);
  s.mean_ms = mean_ns / 1e6;
  s.stddev_ms = std::sqrt(var_ns) / 1e6;
  return s;
}

// ---------------------------------------------------------------------------
// Context sharing
// ---------------------------------------------------------------------------

/// Fraction of equal context fields between two tourists: the four weather
/// tags, trail, difficulty, and day/night, equally weighted.
inline double sharing_fraction(const ContextRow& a, const ContextRow& b) {
  int equal = 0;
  equal += a.tags.wind == b.tags.wind;
  equal += a.tags.fog == b.tags.fog;
  equal += a.tags.temperature == b.tags.temperature;
  equal += a.tags.rain == b.tags.rain;
  equal += a.trail_id == b.trail_id;
  equal += a.difficulty == b.difficulty;
  equal += a.day_night == b.day_night;
  return static_cast<double>(equal) / 7.0;
}

/// Pair counts over the bands 0/25/50/75/100 percent, nearest band wins.
using SharingHistogram = std::array<std::uint64_t, 5>;

inline SharingHistogram context_sharing_histogram(const RepositorySnapshot& snap,
                                                  std::size_t max_pairs, Rng* rng) {
  SharingHistogram h{};
  const std::size_t n = snap.rows.size();
  if (n < 2) return h;
  auto record = [&](const ContextRow& a, const ContextRow& b) {
    const auto band = static_cast<std::size_t>(std::lround(sharing_fraction(a, b) * 4.0));
    ++h[band];
  };
  const std::size_t all_pairs = n * (n - 1) / 2;
  if (all_pairs <= max_pairs || !rng) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) record(snap.rows[i], snap.rows[j]);
    return h;
  }
  for (std::size_t k = 0; k < max_pairs; ++k) {
    const auto i = static_cast<std::size_t>(rng->uniform_int(0, static_cast<std::int64_t>(n) - 1));
    auto j = static_cast<std::size_t>(rng->uniform_int(0, static_cast<std::int64_t>(n) - 2));
    if (j >= i) ++j;
    record(snap.rows[i], snap.rows[j]);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Run accumulation and memory dumps
// ---------------------------------------------------------------------------

struct TransitionStats {
  std::uint64_t tourists = 0;  // departed tourists the stats cover
  SummaryStats transitions;
};

/// Periodic snapshot of everything the run has accumulated. Cumulative
/// fields never decrease from one dump to the next; the population identity
/// total = left + current and the located split gps + bts = rows hold at
/// every dump by construction.
struct Dump {
  int index = 0;
  std::int64_t at = 0;
  std::string clock;

  std::uint64_t total = 0, left = 0, current = 0;
  std::uint64_t located_gps = 0, located_bts = 0;  // split of the stored rows
  std::uint64_t gps_refused = 0;                   // ground truth, if supplied

  std::array<std::uint64_t, 5> weather_cum{};      // verdict counts, E1..E5
  std::array<std::uint64_t, 4> situational_cum{};  // E6g, E6a, E6m, E6r
  std::uint64_t assessments = 0;
  std::array<std::uint64_t, 4> proximity{};        // 0, 1, 2, 3+ stations in range

  std::uint64_t groups = 0, group_members = 0;
  std::uint64_t members_located_gps = 0, members_located_bts = 0;
  std::uint64_t locations_improved = 0;

  std::optional<TransitionStats> transitions;  // absent until someone departs
  SharingHistogram sharing{};

  std::uint64_t solver_calls = 0, solver_starts = 0;
  double solve_mean_ms = 0, solve_stddev_ms = 0;

  std::uint64_t messages_seen = 0, messages_dropped = 0;
  std::uint64_t unlocatable = 0, one_station_events = 0;
};

/// Accumulates per-cycle observations into the numbers the dumps and final
/// reports need. Feed it every CycleReport in order; everything else is
/// derived on demand.
class RunStats {
 public:
  explicit RunStats(const AreaConfig& area, std::size_t sharing_sample_pairs = 2000,
                    std::uint64_t sharing_seed = 2021)
      : area_(area), sharing_sample_(sharing_sample_pairs), sharing_seed_(sharing_seed) {}

  void observe_cycle(const CycleReport& report) {
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
      const ThreatVerdict& v = report.verdicts[i];
      const ContextRow& row = report.snapshot.rows[i];
      ++assessments_;
      assessed_ids_.insert(v.tourist_id);
      ++weather_cum_[static_cast<std::size_t>(v.weather) - 1];
      if (has(v.situational, Situational::GroupSeparation)) ++situational_cum_[0];
      if (has(v.situational, Situational::AnimalProximity)) ++situational_cum_[1];
      if (has(v.situational, Situational::NoMotion)) ++situational_cum_[2];
      if (has(v.situational, Situational::OffRoute)) ++situational_cum_[3];
      ++weather_by_trail_[row.trail_id][static_cast<std::size_t>(v.weather) - 1];
      tag_severity_sum_ += static_cast<double>(
          static_cast<int>(row.tags.wind) + static_cast<int>(row.tags.fog) +
          static_cast<int>(row.tags.temperature) + static_cast<int>(row.tags.rain) - 4);

      int in_range = 0;
      for (const WeatherStation& ws : area_.weather_stations)
        if (distance(row.fix.point, ws.location) <= ws.influence_radius) ++in_range;
      ++proximity_[static_cast<std::size_t>(std::min(in_range, 3))];

      const CtxKey key{row.tags, row.trail_id, row.difficulty, row.day_night};
      auto [it, fresh] = last_ctx_.try_emplace(v.tourist_id, key);
      if (!fresh && !(it->second == key)) {
        ++transition_counts_[v.tourist_id];
        it->second = key;
      } else if (fresh) {
        transition_counts_.try_emplace(v.tourist_id, 0);
      }
    }
    for (const DepartureEvent& e : report.departures) retire(e.tourist_id);
  }

  void observe_departures(const std::vector<DepartureEvent>& events) {
    for (const DepartureEvent& e : events) retire(e.tourist_id);
  }

  /// Transition counts over tourists who have already departed; nothing to
  /// report until the first departure.
  std::optional<TransitionStats> transition_stats() const {
    if (departed_transitions_.empty()) return std::nullopt;
    return TransitionStats{departed_transitions_.size(), summarize(departed_transitions_)};
  }

  Dump take_dump(const CycleDriver& driver, std::int64_t now, std::uint64_t gps_refused = 0) {
    Dump d;
    d.index = static_cast<int>(dumps_.size()) + 1;
    d.at = now;
    d.clock = area_.schedule.format_timestamp(now);

    d.total = driver.arrivals_total();
    d.left = driver.departures_total();
    d.current = driver.tracked_now();
    // Split from the live store: every tracked tourist has exactly one row,
    // and every row's fix came from exactly one of the two location paths.
    const RepositorySnapshot snap = driver.repository().snapshot();
    std::set<int> member_ids;
    for (const auto& [gid, members] : driver.groups())
      for (int m : members) member_ids.insert(m);
    for (const ContextRow& row : snap.rows) {
      const bool gps = row.fix.source == FixSource::Gps;
      ++(gps ? d.located_gps : d.located_bts);
      if (row.tourist_id.size() > 1 &&
          member_ids.count(std::stoi(row.tourist_id.substr(1))))
        ++(gps ? d.members_located_gps : d.members_located_bts);
    }
    d.gps_refused = gps_refused;

    d.weather_cum = weather_cum_;
    d.situational_cum = situational_cum_;
    d.assessments = assessments_;
    d.proximity = proximity_;

    d.groups = driver.groups().size();
    for (const auto& [gid, members] : driver.groups())
      d.group_members += members.size();
    d.locations_improved = driver.counters().group_improvements;

    d.transitions = transition_stats();
    Rng rng = Rng(sharing_seed_).fork(static_cast<std::uint64_t>(d.index));
    d.sharing = context_sharing_histogram(snap, sharing_sample_, &rng);

    d.solver_calls = driver.reasoning_counters().solver_calls;
    d.solver_starts = driver.reasoning_counters().solver_starts;
    const SolveTimeStats st = solve_time_stats(driver.reasoning_counters());
    d.solve_mean_ms = st.mean_ms;
    d.solve_stddev_ms = st.stddev_ms;

    d.messages_seen = driver.counters().messages_seen;
    d.messages_dropped = driver.counters().messages_dropped;
    d.unlocatable = driver.counters().unlocatable;
    d.one_station_events = driver.counters().one_station_events;

    dumps_.push_back(d);
    return d;
  }

  const std::vector<Dump>& dumps() const { return dumps_; }
  const std::map<std::string, std::array<std::uint64_t, 5>>& weather_by_trail() const {
    return weather_by_trail_;
  }
  const std::array<std::uint64_t, 5>& weather_totals() const { return weather_cum_; }
  const std::array<std::uint64_t, 4>& situational_totals() const { return situational_cum_; }
  const std::array<std::uint64_t, 4>& proximity_buckets() const { return proximity_; }
  std::uint64_t assessments() const { return assessments_; }
  std::uint64_t assessed_tourists() const { return assessed_ids_.size(); }
  double events_per_tourist() const {
    return assessed_ids_.empty()
               ? 0.0
               : static_cast<double>(assessments_) / static_cast<double>(assessed_ids_.size());
  }
  /// Mean observed tag elevation per assessment: 0 when every factor sat at
  /// level 1, up to 8 with all four at level 3.
  double severity_mean() const {
    return assessments_ == 0 ? 0.0 : tag_severity_sum_ / static_cast<double>(assessments_);
  }

 private:
  struct CtxKey {
    WeatherTags tags;
    std::string trail;
    Difficulty difficulty = Difficulty::D1;
    DayNight day_night = DayNight::Day;
    bool operator==(const CtxKey&) const = default;
  };

  void retire(const std::string& id) {
    auto it = transition_counts_.find(id);
    if (it == transition_counts_.end()) return;
    departed_transitions_.push_back(static_cast<double>(it->second));
    transition_counts_.erase(it);
    last_ctx_.erase(id);
  }

  const AreaConfig& area_;
  std::size_t sharing_sample_;
  std::uint64_t sharing_seed_;

  std::array<std::uint64_t, 5> weather_cum_{};
  std::array<std::uint64_t, 4> situational_cum_{};
  std::array<std::uint64_t, 4> proximity_{};
  std::map<std::string, std::array<std::uint64_t, 5>> weather_by_trail_;
  std::uint64_t assessments_ = 0;
  double tag_severity_sum_ = 0.0;
  std::set<std::string> assessed_ids_;
  std::map<std::string, CtxKey> last_ctx_;
  std::map<std::string, std::uint64_t> transition_counts_;
  std::vector<double> departed_transitions_;
  std::vector<Dump> dumps_;
};

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

namespace analytics_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace analytics_detail

inline void write_dumps_csv(const std::string& path, const std::vector<Dump>& dumps) {
  std::string out =
      "index,at,clock,total,left,current,located_gps,located_bts,gps_refused,"
      "e1,e2,e3,e4,e5,e6g,e6a,e6m,e6r,assessments,"
      "stations_none,stations_one,stations_two,stations_three_plus,"
      "groups,group_members,members_gps,members_bts,locations_improved,"
      "departed,transitions_avg,transitions_min,transitions_max,transitions_stddev,"
      "share_0,share_25,share_50,share_75,share_100,"
      "solver_calls,solver_starts,solve_mean_ms,solve_stddev_ms,"
      "messages,dropped,unlocatable,one_station_events\n";
  for (const Dump& d : dumps) {
    out += std::to_string(d.index) + "," + std::to_string(d.at) + "," + d.clock + "," +
           std::to_string(d.total) + "," + std::to_string(d.left) + "," +
           std::to_string(d.current) + "," + std::to_string(d.located_gps) + "," +
           std::to_string(d.located_bts) + "," + std::to_string(d.gps_refused);
    for (auto v : d.weather_cum) out += "," + std::to_string(v);
    for (auto v : d.situational_cum) out += "," + std::to_string(v);
    out += "," + std::to_string(d.assessments);
    for (auto v : d.proximity) out += "," + std::to_string(v);
    out += "," + std::to_string(d.groups) + "," + std::to_string(d.group_members) + "," +
           std::to_string(d.members_located_gps) + "," +
           std::to_string(d.members_located_bts) + "," +
           std::to_string(d.locations_improved);
    if (d.transitions) {
      const TransitionStats& t = *d.transitions;
      out += "," + std::to_string(t.tourists) + "," + analytics_detail::fmt(t.transitions.mean) +
             "," + analytics_detail::fmt(t.transitions.min) + "," +
             analytics_detail::fmt(t.transitions.max) + "," +
             analytics_detail::fmt(t.transitions.stddev);
    } else {
      out += ",0,,,,";
    }
    for (auto v : d.sharing) out += "," + std::to_string(v);
    out += "," + std::to_string(d.solver_calls) + "," + std::to_string(d.solver_starts) +
           "," + analytics_detail::fmt(d.solve_mean_ms) + "," +
           analytics_detail::fmt(d.solve_stddev_ms);
    out += "," + std::to_string(d.messages_seen) + "," + std::to_string(d.messages_dropped) +
           "," + std::to_string(d.unlocatable) + "," +
           std::to_string(d.one_station_events) + "\n";
  }
  analytics_detail::write_text_file(path, out);
}

inline void write_threats_csv(
    const std::string& path,
    const std::map<std::string, std::array<std::uint64_t, 5>>& by_trail) {
  std::string out = "trail,e1,e2,e3,e4,e5\n";
  std::array<std::uint64_t, 5> totals{};
  for (const auto& [trail, counts] : by_trail) {
    out += trail;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out += "," + std::to_string(counts[i]);
      totals[i] += counts[i];
    }
    out += "\n";
  }
  out += "TOTAL";
  for (auto v : totals) out += "," + std::to_string(v);
  out += "\n";
  analytics_detail::write_text_file(path, out);
}

inline void write_transitions_csv(const std::string& path,
                                  const std::optional<TransitionStats>& stats) {
  std::string out = "departed_tourists,avg,min,max,stddev\n";
  if (stats) {
    out += std::to_string(stats->tourists) + "," +
           analytics_detail::fmt(stats->transitions.mean) + "," +
           analytics_detail::fmt(stats->transitions.min) + "," +
           analytics_detail::fmt(stats->transitions.max) + "," +
           analytics_detail::fmt(stats->transitions.stddev) + "\n";
  } else {
    out += "0,,,,\n";
  }
  analytics_detail::write_text_file(path, out);
}

inline void write_sharing_csv(const std::string& path, const SharingHistogram& h) {
  std::string out = "band_percent,pairs\n";
  const int bands[5] = {0, 25, 50, 75, 100};
  for (std::size_t i = 0; i < h.size(); ++i)
    out += std::to_string(bands[i]) + "," + std::to_string(h[i]) + "\n";
  analytics_detail::write_text_file(path, out);
}

inline void write_proximity_csv(const std::string& path,
                                const std::array<std::uint64_t, 4>& buckets,
                                double events_per_tourist) {
  std::string out = "stations_in_range,events\nnone," + std::to_string(buckets[0]) +
                    "\none," + std::to_string(buckets[1]) + "\ntwo," +
                    std::to_string(buckets[2]) + "\nthree_plus," +
                    std::to_string(buckets[3]) + "\n\nevents_per_tourist," +
                    analytics_detail::fmt(events_per_tourist) + "\n";
  analytics_detail::write_text_file(path, out);
}

// ---------------------------------------------------------------------------
// Map rendering
// ---------------------------------------------------------------------------

/// Colors follow the alert palette: green through black for rising weather
/// levels, with a violet ring marking any situational threat.
inline const char* weather_color(WeatherThreat w) {
  switch (w) {
    case WeatherThreat::E1: return "#2e8b57";
    case WeatherThreat::E2: return "#e0b400";
    case WeatherThreat::E3: return "#ff8c00";
    case WeatherThreat::E4: return "#d62728";
    case WeatherThreat::E5: return "#111111";
  }
  return "#2e8b57";
}

inline std::string render_map_svg(const AreaConfig& area, const RepositorySnapshot& snap,
                                  const std::vector<ThreatVerdict>& verdicts) {
  const double xmin = area.bounds[0], ymin = area.bounds[1];
  const double w = area.bounds[2] - xmin, h = area.bounds[3] - ymin;
  auto X = [&](double x) { return x - xmin; };
  auto Y = [&](double y) { return area.bounds[3] - y; };  // svg y grows downward
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(w) +
                    " " + num(h) + "\">\n";
  svg += "<rect width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"#f6f3ea\"/>\n";

  for (const Trail& t : area.trails) {
    svg += "<polyline fill=\"none\" stroke=\"#8b7d6b\" stroke-width=\"14\" points=\"";
    for (std::size_t i = 0; i < t.polyline.vertices().size(); ++i) {
      const GeoPoint& p = t.polyline.vertices()[i];
      if (i) svg += " ";
      svg += num(X(p.x)) + "," + num(Y(p.y));
    }
    svg += "\"><title>" + t.id + " " + to_string(t.difficulty) + "</title></polyline>\n";
    const GeoPoint& label_at = t.polyline.vertices().front();
    svg += "<text x=\"" + num(X(label_at.x) + 20) + "\" y=\"" + num(Y(label_at.y) - 20) +
           "\" font-size=\"90\" fill=\"#6b5d4b\">" + t.id + "</text>\n";
    for (const SpecialPlace& sp : t.special_places)
      svg += "<circle cx=\"" + num(X(sp.center.x)) + "\" cy=\"" + num(Y(sp.center.y)) +
             "\" r=\"" + num(sp.radius) +
             "\" fill=\"none\" stroke=\"#7a9e7e\" stroke-width=\"8\" "
             "stroke-dasharray=\"20,14\"/>\n";
  }

  for (const WeatherStation& ws : area.weather_stations) {
    svg += "<circle cx=\"" + num(X(ws.location.x)) + "\" cy=\"" + num(Y(ws.location.y)) +
           "\" r=\"" + num(ws.influence_radius) +
           "\" fill=\"#4a7dbb\" fill-opacity=\"0.06\" stroke=\"#4a7dbb\" "
           "stroke-opacity=\"0.25\" stroke-width=\"4\"/>\n";
    svg += "<circle cx=\"" + num(X(ws.location.x)) + "\" cy=\"" + num(Y(ws.location.y)) +
           "\" r=\"40\" fill=\"#4a7dbb\"><title>" + ws.id + "</title></circle>\n";
  }
  for (const BtsStation& b : area.bts_stations)
    svg += "<rect x=\"" + num(X(b.location.x) - 35) + "\" y=\"" + num(Y(b.location.y) - 35) +
           "\" width=\"70\" height=\"70\" fill=\"#555555\"><title>" + b.id +
           "</title></rect>\n";

  for (std::size_t i = 0; i < verdicts.size() && i < snap.rows.size(); ++i) {
    const ThreatVerdict& v = verdicts[i];
    const GeoPoint& p = snap.rows[i].fix.point;
    svg += "<circle cx=\"" + num(X(p.x)) + "\" cy=\"" + num(Y(p.y)) + "\" r=\"38\" fill=\"" +
           weather_color(v.weather) + "\"";
    if (v.situational != Situational::None)
      svg += " stroke=\"#8a2be2\" stroke-width=\"18\"";
    svg += "><title>" + v.tourist_id + " " + to_string(v.weather);
    const std::string sits = situational_labels(v.situational);
    if (!sits.empty()) svg += " " + sits;
    svg += "</title></circle>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace trailwatch
