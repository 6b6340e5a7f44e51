#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trailwatch/behavior.hpp"
#include "trailwatch/broker.hpp"
#include "trailwatch/journal.hpp"
#include "trailwatch/messages.hpp"
#include "trailwatch/preprocess.hpp"
#include "trailwatch/reasoning.hpp"
#include "trailwatch/repository.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

struct PipelineCounters {
  std::uint64_t messages_seen = 0;
  std::uint64_t messages_dropped = 0;   // unroutable, stale, or unknown target
  std::uint64_t unlocatable = 0;        // fewer than two stations and no GPS
  std::uint64_t low_accuracy_events = 0;
  std::uint64_t one_station_events = 0; // assessments with one reachable station
  std::uint64_t group_improvements = 0;
};

struct CycleReport {
  std::uint64_t cycle = 0;
  std::int64_t now = 0;
  std::vector<ThreatVerdict> verdicts;
  std::vector<ArrivalEvent> arrivals;
  std::vector<DepartureEvent> departures;
  RepositorySnapshot snapshot;  // the state the verdicts were computed from;
                                // verdicts[i] pairs with snapshot.rows[i]
};

/// The gather→preprocess→store→reason→disseminate loop, one call per cycle.
/// Owns all derived per-tourist state (previous fixes, idle clocks, animal
/// sightings); the repository is the only shared store. Tourists are
/// processed in id order, so a run is a pure function of the message streams.
class CycleDriver {
 public:
  CycleDriver(const AreaConfig& area, ContextRepository& repo, Broker& broker,
              RunJournal* journal = nullptr,
              std::optional<Season> season_override = std::nullopt)
      : area_(area),
        repo_(repo),
        journal_(journal),
        season_(season_override.value_or(area.season)),
        home_trails_(station_home_trails(area)),
        sub_weather_(broker.subscribe(Topic::Weather)),
        sub_bts_(broker.subscribe(Topic::BtsMeasurement)),
        sub_gps_(broker.subscribe(Topic::GpsTourist)),
        sub_animal_(broker.subscribe(Topic::GpsAnimal)),
        sub_control_(broker.subscribe(Topic::Control)) {
    for (const BtsStation& b : area_.bts_stations) bts_by_id_[b.id] = &b;
  }

  /// Tourists announce their party at the entry gate; group structure cannot
  /// be inferred from the signal streams alone.
  void register_group(int group_id, int leader_id, const std::vector<int>& member_ids) {
    for (int m : member_ids) membership_[m] = {group_id, leader_id};
    group_members_[group_id] = member_ids;
  }

  void on_verdict(std::function<void(const ThreatVerdict&)> listener) {
    listeners_.push_back(std::move(listener));
  }

  static std::string tourist_key(int id) { return "t" + std::to_string(id); }

  const PipelineCounters& counters() const { return counters_; }
  const ReasoningCounters& reasoning_counters() const { return reasoning_counters_; }
  const std::map<std::string, std::vector<CycleAssessment>>& traces() const { return traces_; }
  const std::map<int, std::vector<int>>& groups() const { return group_members_; }
  std::uint64_t cycles_run() const { return cycle_; }
  std::uint64_t arrivals_total() const { return arrivals_total_; }
  std::uint64_t departures_total() const { return departures_total_; }
  std::uint64_t tracked_now() const { return tracker_.active(); }
  const ContextRepository& repository() const { return repo_; }

  CycleReport run_cycle(std::int64_t now) {
    ++cycle_;
    CycleReport report;
    report.cycle = cycle_;
    report.now = now;

    const Drained d = drain();
    preprocess_and_store(d, now, &report);
    sweep_departures(now, &report);
    evaluate(now, &report);
    arrivals_total_ += report.arrivals.size();
    departures_total_ += report.departures.size();

    if (journal_)
      journal_->message_stats(cycle_, now, d.weather_count, d.bts_count, d.gps_count,
                              d.animal_count, d.control_count,
                              counters_.messages_dropped - dropped_before_);
    dropped_before_ = counters_.messages_dropped;
    return report;
  }

  /// Close out a finished stream: whoever last reported from an entry region
  /// left cleanly; everyone else stays current (their runs were cut short).
  std::vector<DepartureEvent> finish(std::int64_t now) {
    std::vector<DepartureEvent> out = tracker_.finish(area_);
    for (const DepartureEvent& e : out) {
      repo_.mark_departed(e.tourist_id);
      motion_.erase(e.tourist_id);
      if (journal_) journal_->event(now, "departure", e.tourist_id, "end-of-run");
    }
    departures_total_ += out.size();
    return out;
  }

 private:
  struct Membership {
    int group_id = 0;
    int leader_id = 0;
  };

  struct Drained {
    // tourist id -> (station id -> freshest rssi this cycle)
    std::map<int, std::map<std::string, double>> signals;
    std::map<int, GeoPoint> gps;
    std::size_t weather_count = 0, bts_count = 0, gps_count = 0, animal_count = 0,
                control_count = 0;
  };

  struct AnimalSighting {
    GeoPoint point;
    bool dangerous = false;
  };

  struct MotionState {
    GeoPoint last_point;
    std::int64_t last_at = 0;
    std::int64_t idle_seconds = 0;
    bool seen = false;
  };

  Drained drain() {
    Drained d;
    while (auto m = sub_weather_.try_pop()) {
      ++counters_.messages_seen;
      ++d.weather_count;
      const auto& w = std::get<WeatherReadingMsg>(m->payload);
      station_readings_[w.station_id] = {w.wind_mps, w.visibility_m, w.temperature_c,
                                         w.rain_mmh};
    }
    while (auto m = sub_bts_.try_pop()) {
      ++counters_.messages_seen;
      ++d.bts_count;
      const auto& b = std::get<BtsSignalMsg>(m->payload);
      if (!bts_by_id_.count(b.station_id)) {
        ++counters_.messages_dropped;
        continue;
      }
      d.signals[b.phone_id][b.station_id] = b.rssi_dbm;
    }
    while (auto m = sub_gps_.try_pop()) {
      ++counters_.messages_seen;
      ++d.gps_count;
      const auto& g = std::get<GpsTouristMsg>(m->payload);
      d.gps[g.tourist_id] = g.point;
    }
    while (auto m = sub_animal_.try_pop()) {
      ++counters_.messages_seen;
      ++d.animal_count;
      const auto& a = std::get<GpsAnimalMsg>(m->payload);
      animals_[a.animal_id] = {a.point, a.dangerous};
    }
    while (auto m = sub_control_.try_pop()) {
      ++counters_.messages_seen;
      ++d.control_count;
      apply_control(std::get<ControlMsg>(m->payload), m->timestamp);
    }
    return d;
  }

  void apply_control(const ControlMsg& c, std::int64_t t) {
    if (c.kind == ControlMsg::Kind::SetAvalanche) {
      repo_.set_avalanche({c.avalanche, c.operator_id, t});
      if (journal_) journal_->avalanche(t, c.avalanche, c.operator_id);
      return;
    }
    try {
      const std::string previous = repo_.swap_alert_set(c.alert_set_name);
      if (journal_) journal_->swap(t, previous, c.alert_set_name);
    } catch (const NotFoundError&) {
      ++counters_.messages_dropped;  // swap to a set nobody loaded
    }
  }

  void preprocess_and_store(const Drained& d, std::int64_t now, CycleReport* report) {
    // Ids heard from either sensor path this cycle, ascending.
    std::set<int> ids;
    for (const auto& [id, s] : d.signals) ids.insert(id);
    for (const auto& [id, p] : d.gps) ids.insert(id);

    // First pass: locate everyone, so group improvement can lean on
    // co-members' fixes from the same cycle.
    std::map<int, GeoFix> fixes;
    for (int id : ids) {
      const std::string key = tourist_key(id);
      std::vector<StationSignal> signals;
      if (auto it = d.signals.find(id); it != d.signals.end())
        for (const auto& [station_id, rssi] : it->second)
          signals.push_back({bts_by_id_.at(station_id), rssi});
      std::optional<GeoPoint> gps;
      if (auto it = d.gps.find(id); it != d.gps.end()) gps = it->second;
      std::optional<GeoFix> previous;
      if (auto it = last_fix_.find(key); it != last_fix_.end()) previous = it->second;

      try {
        GeolocationResult res =
            a1_geolocate(key, std::move(signals), gps, previous, area_.pipeline, now);
        if (res.low_accuracy) {
          ++counters_.low_accuracy_events;
          if (journal_)
            journal_->event(now, "low_accuracy", key,
                            res.low_accuracy->station_id + " " +
                                std::to_string(static_cast<long long>(
                                    res.low_accuracy->mismatch)));
        }
        fixes.emplace(id, std::move(res.fix));
      } catch (const UnlocatableError&) {
        ++counters_.unlocatable;
      }
    }

    // Second pass: route, improve, tag, detect, store.
    for (auto& [id, fix] : fixes) {
      const std::string key = tourist_key(id);
      std::optional<std::string> prev_trail;
      if (auto it = last_trail_.find(key); it != last_trail_.end()) prev_trail = it->second;
      RouteAssignment route =
          assign_route(fix.point, area_, prev_trail, area_.pipeline.off_trail);

      const auto member = membership_.find(id);
      if (member != membership_.end() && fix.source == FixSource::BtsTrilateration) {
        std::vector<double> co_arclengths;
        for (int other_id : group_members_.at(member->second.group_id)) {
          if (other_id == id) continue;
          auto of = fixes.find(other_id);
          if (of == fixes.end() || of->second.source != FixSource::Gps) continue;
          if (distance(fix.point, of->second.point) > area_.pipeline.group_radius) continue;
          const RouteAssignment other_route =
              assign_route(of->second.point, area_, std::nullopt, area_.pipeline.off_trail);
          if (other_route.trail_id == route.trail_id)
            co_arclengths.push_back(other_route.arclength);
        }
        if (!co_arclengths.empty()) {
          fix = improve_with_group(fix, area_.trail(route.trail_id), route.arclength,
                                   co_arclengths);
          route = assign_route(fix.point, area_, route.trail_id, area_.pipeline.off_trail);
          ++counters_.group_improvements;
        }
      }

      // Travel direction from the previous assessment on the same trail.
      int direction = 1;
      if (auto it = last_arclength_.find(key);
          it != last_arclength_.end() && prev_trail && *prev_trail == route.trail_id &&
          route.arclength < it->second)
        direction = -1;

      int in_range = 0;
      for (const WeatherStation& ws : area_.weather_stations)
        if (distance(fix.point, ws.location) <= ws.influence_radius) ++in_range;
      if (in_range == 1) ++counters_.one_station_events;
      const std::string station =
          select_station(area_, home_trails_, fix.point, area_.trail_pos(route.trail_id),
                         route.arclength, direction, area_.pipeline.station_band);

      ContextRow row;
      row.tourist_id = key;
      row.fix = fix;
      row.trail_id = route.trail_id;
      row.difficulty = area_.trail(route.trail_id).difficulty;
      if (auto it = station_readings_.find(station); it != station_readings_.end())
        row.tags = a2_tag_weather(it->second, area_.tags, season_);
      row.selected_station = station;
      row.day_night = area_.schedule.day_night_at(now);
      row.season = season_;
      row.avalanche = repo_.avalanche().level;
      row.off_trail = route.off_trail;

      MotionState& motion = motion_[key];
      if (motion.seen &&
          distance(motion.last_point, fix.point) < area_.pipeline.idle_displacement)
        motion.idle_seconds += now - motion.last_at;
      else
        motion.idle_seconds = 0;
      motion.last_point = fix.point;
      motion.last_at = now;
      motion.seen = true;
      row.motion_idle_seconds = motion.idle_seconds;

      if (member != membership_.end() && id != member->second.leader_id) {
        const GeoFix* leader = nullptr;
        if (auto lf = fixes.find(member->second.leader_id); lf != fixes.end())
          leader = &lf->second;
        else if (auto lf2 = last_fix_.find(tourist_key(member->second.leader_id));
                 lf2 != last_fix_.end())
          leader = &lf2->second;
        if (leader) row.group_leader_distance = distance(fix.point, leader->point);
      }

      double nearest_animal = -1.0;
      for (const auto& [aid, sighting] : animals_) {
        if (!sighting.dangerous) continue;
        const double dist = distance(fix.point, sighting.point);
        if (nearest_animal < 0 || dist < nearest_animal) nearest_animal = dist;
      }
      if (nearest_animal >= 0) row.animal_distance = nearest_animal;

      row.updated_at = now;

      if (auto arrival = tracker_.on_fix(fix, area_)) {
        report->arrivals.push_back(*arrival);
        if (journal_) journal_->event(now, "arrival", arrival->tourist_id, route.trail_id);
      }

      try {
        repo_.upsert_row(std::move(row));
      } catch (const StaleWriteError&) {
        ++counters_.messages_dropped;  // late data for someone already gone
        continue;
      }
      last_fix_[key] = fix;
      last_trail_[key] = route.trail_id;
      last_arclength_[key] = route.arclength;
    }
  }

  void sweep_departures(std::int64_t now, CycleReport* report) {
    for (const DepartureEvent& e : tracker_.sweep(now, area_)) {
      repo_.mark_departed(e.tourist_id);
      motion_.erase(e.tourist_id);
      report->departures.push_back(e);
      if (journal_)
        journal_->event(now, "departure", e.tourist_id,
                        e.lost_signal ? "lost-signal" : "clean");
    }
  }

  void evaluate(std::int64_t now, CycleReport* report) {
    report->snapshot = repo_.snapshot();
    const RepositorySnapshot& snap = report->snapshot;
    report->verdicts =
        evaluate_snapshot(snap, area_, cycle_, now, &solver_, &reasoning_counters_);
    for (std::size_t i = 0; i < report->verdicts.size(); ++i) {
      const ThreatVerdict& v = report->verdicts[i];
      const ContextRow& row = snap.rows[i];
      double lat = 0.0, lon = 0.0;
      area_.origin.to_degrees(row.fix.point, &lat, &lon);

      CycleAssessment a;
      a.cycle = v.cycle;
      a.weather = v.weather;
      a.situational = v.situational;
      a.lat = lat;
      a.lon = lon;
      a.timestamp = area_.schedule.format_timestamp(now);
      a.trail_id = row.trail_id;
      a.difficulty = row.difficulty;
      traces_[v.tourist_id].push_back(std::move(a));

      if (journal_) journal_->verdict(v, lat, lon, row.trail_id, row.difficulty);
      for (const auto& listener : listeners_) listener(v);
    }
  }

  const AreaConfig& area_;
  ContextRepository& repo_;
  RunJournal* journal_;
  Season season_;
  std::vector<std::size_t> home_trails_;
  std::map<std::string, const BtsStation*> bts_by_id_;

  Broker::Subscription sub_weather_, sub_bts_, sub_gps_, sub_animal_, sub_control_;

  ArrivalTracker tracker_;
  DpllSolver solver_;
  std::map<int, Membership> membership_;
  std::map<int, std::vector<int>> group_members_;
  std::map<std::string, GeoFix> last_fix_;
  std::map<std::string, std::string> last_trail_;
  std::map<std::string, double> last_arclength_;
  std::map<std::string, MotionState> motion_;
  std::map<int, AnimalSighting> animals_;
  std::map<std::string, WeatherReading> station_readings_;
  std::map<std::string, std::vector<CycleAssessment>> traces_;
  std::vector<std::function<void(const ThreatVerdict&)>> listeners_;

  PipelineCounters counters_;
  ReasoningCounters reasoning_counters_;
  std::uint64_t cycle_ = 0;
  std::uint64_t dropped_before_ = 0;
  std::uint64_t arrivals_total_ = 0;
  std::uint64_t departures_total_ = 0;
};

}  // namespace trailwatch
