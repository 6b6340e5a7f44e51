#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trailwatch/geo.hpp"
#include "trailwatch/messages.hpp"
#include "trailwatch/preprocess.hpp"
#include "trailwatch/rng.hpp"
#include "trailwatch/scenario.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

/// Ground-truth record of what actually happened in a run; the support
/// pipeline never sees this, tests compare against it.
struct SimEvent {
  std::int64_t t = 0;
  std::string kind;    // arrival departure lost self_return rescued no_motion
                       // motion_resumed control through_hike
  std::string entity;  // "t<id>", "a<id>", or "" for controls
  std::string detail;
};

/// Discrete-time environment generator. One instance owns the full world
/// state; step() advances one tick and returns the messages that the
/// sensor fleet published during it, in a fixed deterministic order:
/// controls, weather, BTS (station-major), tourist GPS, animal GPS.
class Simulator {
 public:
  Simulator(const AreaConfig& area, ScenarioSpec scenario, std::uint64_t seed)
      : area_(area),
        scenario_(std::move(scenario)),
        seed_(seed),
        arrivals_rng_(Rng(seed).fork(101)),
        incidents_rng_(Rng(seed).fork(103)),
        noise_rng_(Rng(seed).fork(104)),
        animals_rng_(Rng(seed).fork(105)),
        movement_rng_(Rng(seed).fork(106)) {
    for (const auto& trail : area_.trails)
      for (double e : trail.entry_points) entries_.push_back({trail.id, e});
    for (const auto& jn : find_junctions(area_)) {
      const std::string& a_id = area_.trails[jn.trail_a].id;
      const std::string& b_id = area_.trails[jn.trail_b].id;
      junctions_by_trail_[a_id].push_back({jn.arclength_a, b_id, jn.arclength_b});
      junctions_by_trail_[b_id].push_back({jn.arclength_b, a_id, jn.arclength_a});
    }
    for (auto& [id, list] : junctions_by_trail_)
      std::sort(list.begin(), list.end(),
                [](const JunctionSide& a, const JunctionSide& b) { return a.at < b.at; });

    mean_stay_ = scenario_.params.mean_stay_s > 0.0 ? scenario_.params.mean_stay_s
                                                    : estimate_mean_stay();
    spawn_animals();
  }

  std::int64_t now() const { return t_; }
  bool done() const { return t_ >= scenario_.params.duration_s; }
  const std::vector<SimEvent>& events() const { return events_; }
  std::int64_t arrivals_total() const { return arrivals_total_; }
  std::int64_t departures_total() const { return departures_total_; }
  std::int64_t population() const { return arrivals_total_ - departures_total_; }
  const AreaConfig& area() const { return area_; }
  const ScenarioSpec& scenario() const { return scenario_; }

  const std::map<int, Tourist>& tourists() const { return tourists_view_; }
  const std::vector<Animal>& animals() const { return animals_; }
  const std::map<int, Group>& groups() const { return groups_; }

  GeoPoint tourist_position(int id) const {
    const SimTourist& st = sims_.at(id);
    return position_of(st);
  }

  /// Scripted entry for reproducible single-actor runs; drives the same
  /// arrival bookkeeping as the stochastic process.
  int inject_tourist(const std::string& trail_id, double arclength, int direction,
                     double speed, PhoneMode mode,
                     std::optional<int> group_id = std::nullopt) {
    const Trail& trail = area_.trail(trail_id);
    SimTourist st;
    st.t.id = next_tourist_id_++;
    st.t.phone_mode = mode;
    st.t.group_id = group_id;
    st.t.speed = speed;
    st.t.trail_id = trail_id;
    st.t.arclength = std::clamp(arclength, 0.0, trail.polyline.length());
    st.t.direction = direction >= 0 ? 1 : -1;
    st.t.entered_at = t_;
    st.entry_trail = trail_id;
    st.entry_arclength = st.t.arclength;
    if (group_id) {
      auto& g = groups_[*group_id];
      if (g.member_ids.empty()) {
        g.id = *group_id;
        g.leader_id = st.t.id;
      }
      g.member_ids.push_back(st.t.id);
    }
    sims_.emplace(st.t.id, st);
    tourists_view_[st.t.id] = st.t;
    ++arrivals_total_;
    log("arrival", "t" + std::to_string(st.t.id),
        trail_id + "@" + std::to_string(static_cast<long long>(st.t.arclength)));
    return st.t.id;
  }

  /// Advance one tick. Returns this tick's sensor and control messages.
  std::vector<Message> step() {
    std::vector<Message> out;
    const SimParams& p = scenario_.params;

    emit_controls(out);
    if (t_ % p.weather_interval_s == 0) emit_weather(out);
    if (t_ % p.geo_interval_s == 0) emit_geolocation(out);
    if (t_ % 60 == 0) sample_incidents();

    move_tourists();
    move_animals();
    spawn_arrivals();

    t_ += p.tick_s;
    return out;
  }

 private:
  struct JunctionSide {
    double at = 0.0;
    std::string other_trail;
    double other_at = 0.0;
  };

  /// Restoration record for retracing a junction switch on the way back.
  struct Breadcrumb {
    std::string from_trail;
    double from_arclength = 0.0;
    int from_direction = 1;
    double on_arclength = 0.0;  // junction arclength on the trail switched to
  };

  struct SimTourist {
    Tourist t;
    std::vector<Breadcrumb> crumbs;
    bool outbound = true;
    std::string entry_trail;
    double entry_arclength = 0.0;
    std::int64_t pause_until = -1;
    std::int64_t incident_until = -1;
    bool will_self_return = false;
    std::set<std::string> visited_specials;
  };

  void log(std::string kind, std::string entity, std::string detail) {
    events_.push_back({t_, std::move(kind), std::move(entity), std::move(detail)});
  }

  GeoPoint position_of(const SimTourist& st) const {
    if (st.t.state == TouristState::Lost || st.t.state == TouristState::Rescued)
      return st.t.off_trail_position;
    return area_.trail(st.t.trail_id).polyline.position_at(st.t.arclength);
  }

  double estimate_mean_stay() const {
    const SimParams& p = scenario_.params;
    const double v = 0.5 * (p.speed_min + p.speed_max);
    double total = 0.0;
    int n = 0;
    for (const auto& trail : area_.trails) {
      if (trail.entry_points.empty()) continue;
      total += 2.0 * trail.polyline.length() / v;
      ++n;
    }
    return n > 0 ? total / n : 3600.0;
  }

  void spawn_animals() {
    const SimParams& p = scenario_.params;
    const int dangerous = static_cast<int>(
        std::ceil(p.dangerous_fraction * static_cast<double>(p.animal_count)));
    for (int i = 0; i < p.animal_count; ++i) {
      Animal a;
      a.id = i + 1;
      a.location.x = animals_rng_.uniform(area_.bounds[0] + 100.0, area_.bounds[2] - 100.0);
      a.location.y = animals_rng_.uniform(area_.bounds[1] + 100.0, area_.bounds[3] - 100.0);
      a.speed = animals_rng_.uniform(p.animal_speed_min, p.animal_speed_max);
      a.heading = animals_rng_.uniform(0.0, 6.283185307179586);
      a.dangerous = i < dangerous;
      animals_.push_back(a);
    }
  }

  // --- emission ------------------------------------------------------------

  void emit_controls(std::vector<Message>& out) {
    while (next_control_ < scenario_.controls.size() &&
           scenario_.controls[next_control_].at <= t_) {
      const ScheduledControl& c = scenario_.controls[next_control_++];
      ControlMsg msg;
      if (c.avalanche) {
        msg.kind = ControlMsg::Kind::SetAvalanche;
        msg.avalanche = *c.avalanche;
        log("control", "", std::string("avalanche ") + to_string(*c.avalanche));
      } else {
        msg.kind = ControlMsg::Kind::SwapAlertSet;
        msg.alert_set_name = *c.alert_set;
        log("control", "", "alert_set " + *c.alert_set);
      }
      out.push_back({Topic::Control, t_, 0, msg});
    }
  }

  void emit_weather(std::vector<Message>& out) {
    for (const auto& ws : area_.weather_stations) {
      const WeatherReading r = weather_at(scenario_, ws.id, t_, seed_);
      out.push_back({Topic::Weather, t_, 0,
                     WeatherReadingMsg{ws.id, r.wind_mps, r.visibility_m,
                                       r.temperature_c, r.rain_mmh}});
    }
  }

  void emit_geolocation(std::vector<Message>& out) {
    for (const auto& bts : area_.bts_stations) {
      for (const auto& [id, st] : sims_) {
        if (st.t.state == TouristState::Departed) continue;
        const GeoPoint pos = position_of(st);
        const double d = distance(bts.location, pos);
        if (d > bts.max_range) continue;
        const double rssi =
            rssi_from_distance(bts, d) + noise_rng_.normal(0.0, bts.noise_sigma);
        out.push_back({Topic::BtsMeasurement, t_, 0, BtsSignalMsg{bts.id, id, rssi}});
      }
    }
    for (const auto& [id, st] : sims_) {
      if (st.t.state == TouristState::Departed) continue;
      if (st.t.phone_mode != PhoneMode::GpsConsent) continue;
      out.push_back({Topic::GpsTourist, t_, 0, GpsTouristMsg{id, position_of(st)}});
    }
    for (const auto& a : animals_)
      if (a.gps_equipped)
        out.push_back({Topic::GpsAnimal, t_, 0, GpsAnimalMsg{a.id, a.location, a.dangerous}});
  }

  // --- incidents -----------------------------------------------------------

  void sample_incidents() {
    const SimParams& p = scenario_.params;
    const int severity = weather_severity(scenario_, area_.tags, t_);
    const double mult = 1.0 + p.weather_coupling * static_cast<double>(severity);
    const double p_lost = std::min(1.0, p.p_lost_per_min * mult);
    const double p_still = std::min(1.0, p.p_no_motion_per_min * mult);

    for (auto& [id, st] : sims_) {
      if (st.t.state != TouristState::Hiking) continue;
      if (st.pause_until > t_) continue;
      if (incidents_rng_.bernoulli(p_lost)) {
        begin_lost(st);
      } else if (incidents_rng_.bernoulli(p_still)) {
        st.t.state = TouristState::NoMotion;
        st.incident_until =
            t_ + static_cast<std::int64_t>(p.no_motion_base_s +
                                           incidents_rng_.exponential(p.no_motion_extra_mean_s));
        tourists_view_[id] = st.t;
        log("no_motion", "t" + std::to_string(id),
            "until " + std::to_string(st.incident_until));
      }
    }
  }

  void begin_lost(SimTourist& st) {
    const SimParams& p = scenario_.params;
    const Trail& trail = area_.trail(st.t.trail_id);
    const GeoPoint on = trail.polyline.position_at(st.t.arclength);
    // Perpendicular wander off the trail tangent, either side.
    const GeoPoint ahead =
        trail.polyline.position_at(std::min(st.t.arclength + 1.0, trail.polyline.length()));
    double tx = ahead.x - on.x, ty = ahead.y - on.y;
    const double norm = std::hypot(tx, ty);
    if (norm < 1e-9) {
      tx = 1.0;
      ty = 0.0;
    } else {
      tx /= norm;
      ty /= norm;
    }
    const double side = incidents_rng_.bernoulli(0.5) ? 1.0 : -1.0;
    const double off = incidents_rng_.uniform(p.lost_offset_min, p.lost_offset_max);
    st.t.off_trail_position = {on.x - ty * off * side, on.y + tx * off * side};
    st.t.state = TouristState::Lost;
    st.will_self_return = incidents_rng_.bernoulli(p.p_self_return);
    st.incident_until =
        t_ + static_cast<std::int64_t>(incidents_rng_.exponential(p.lost_dwell_mean_s));
    tourists_view_[st.t.id] = st.t;
    log("lost", "t" + std::to_string(st.t.id),
        "offset " + std::to_string(static_cast<long long>(off)));
  }

  // --- movement ------------------------------------------------------------

  void move_tourists() {
    const SimParams& p = scenario_.params;
    const double dt = static_cast<double>(p.tick_s);

    for (auto& [id, st] : sims_) {
      switch (st.t.state) {
        case TouristState::Departed:
          continue;
        case TouristState::Lost:
          if (t_ >= st.incident_until) {
            if (st.will_self_return) {
              st.t.state = TouristState::Hiking;
              log("self_return", "t" + std::to_string(id), "");
            } else {
              st.t.state = TouristState::Rescued;
              st.incident_until = t_ + static_cast<std::int64_t>(p.rescue_wait_s);
            }
          }
          break;
        case TouristState::Rescued:
          if (t_ >= st.incident_until) {
            st.t.state = TouristState::Evacuating;
            st.outbound = false;
            st.t.direction = homeward_direction(st);
            log("rescued", "t" + std::to_string(id), "");
          }
          break;
        case TouristState::NoMotion:
          if (t_ >= st.incident_until) {
            st.t.state = TouristState::Hiking;
            log("motion_resumed", "t" + std::to_string(id), "");
          }
          break;
        case TouristState::Hiking:
        case TouristState::Evacuating:
          if (st.pause_until <= t_) advance_along_trail(st, st.t.speed * dt);
          break;
      }
      tourists_view_[id] = st.t;
    }
  }

  int homeward_direction(const SimTourist& st) const {
    // Head back toward the last breadcrumb junction, or the entry point.
    const double target = st.crumbs.empty() && st.t.trail_id == st.entry_trail
                              ? st.entry_arclength
                              : (st.crumbs.empty() ? 0.0 : st.crumbs.back().on_arclength);
    return target >= st.t.arclength ? 1 : -1;
  }

  void advance_along_trail(SimTourist& st, double dist) {
    const SimParams& p = scenario_.params;
    int guard = 0;
    while (dist > 1e-9 && ++guard < 8) {
      const Trail& trail = area_.trail(st.t.trail_id);
      const double len = trail.polyline.length();
      const double s0 = st.t.arclength;
      double s1 = s0 + static_cast<double>(st.t.direction) * dist;

      if (st.outbound) {
        // Junction switching happens only on the way out; the way back
        // retraces breadcrumbs so every walk ends at a real entry point.
        if (const JunctionSide* jn = first_junction_crossed(trail.id, s0, s1)) {
          if (movement_rng_.bernoulli(p.junction_switch_p)) {
            const double used = std::abs(jn->at - s0);
            dist -= used;
            st.crumbs.push_back({st.t.trail_id, jn->at, st.t.direction, jn->other_at});
            const Trail& other = area_.trail(jn->other_trail);
            st.t.trail_id = jn->other_trail;
            st.t.arclength = jn->other_at;
            st.t.direction = jn->other_at < other.polyline.length() * 0.5 ? 1 : -1;
            log("switch_trail", "t" + std::to_string(st.t.id),
                trail.id + "->" + jn->other_trail);
            continue;
          }
        }
      } else if (!st.crumbs.empty() && st.t.trail_id != st.entry_trail) {
        // Crossing the junction we came in by: pop back to the previous trail.
        const Breadcrumb& bc = st.crumbs.back();
        if (crosses(s0, s1, bc.on_arclength)) {
          const double used = std::abs(bc.on_arclength - s0);
          dist -= used;
          st.t.trail_id = bc.from_trail;
          st.t.arclength = bc.from_arclength;
          st.t.direction = -bc.from_direction;
          st.crumbs.pop_back();
          continue;
        }
      }

      if (s1 <= 0.0 || s1 >= len) {
        const double end = s1 <= 0.0 ? 0.0 : len;
        dist -= std::abs(end - s0);
        st.t.arclength = end;
        if (st.outbound && trail_has_entry_at(trail, end) && st.t.state == TouristState::Hiking) {
          depart(st, "through");
          return;
        }
        st.t.direction = -st.t.direction;
        if (st.outbound) {
          st.outbound = false;
          log("turnaround", "t" + std::to_string(st.t.id), trail.id);
        }
        continue;
      }

      st.t.arclength = s1;
      dist = 0.0;

      if (!st.outbound && st.t.trail_id == st.entry_trail && st.crumbs.empty() &&
          std::abs(st.t.arclength - st.entry_arclength) <= area_.pipeline.entry_region) {
        depart(st, "return");
        return;
      }
      if (st.outbound && st.t.state == TouristState::Hiking) maybe_pause_at_special(st);
    }
  }

  static bool crosses(double s0, double s1, double point) {
    return (s0 - point) * (s1 - point) <= 0.0 && s0 != s1;
  }

  const JunctionSide* first_junction_crossed(const std::string& trail_id, double s0,
                                             double s1) const {
    auto it = junctions_by_trail_.find(trail_id);
    if (it == junctions_by_trail_.end()) return nullptr;
    const JunctionSide* best = nullptr;
    for (const auto& jn : it->second) {
      if (std::abs(jn.at - s0) < 1e-9) continue;  // standing on it already
      if (!crosses(s0, s1, jn.at)) continue;
      if (!best || std::abs(jn.at - s0) < std::abs(best->at - s0)) best = &jn;
    }
    return best;
  }

  static bool trail_has_entry_at(const Trail& trail, double arclength) {
    for (double e : trail.entry_points)
      if (std::abs(e - arclength) < 1.0) return true;
    return false;
  }

  void maybe_pause_at_special(SimTourist& st) {
    const Trail& trail = area_.trail(st.t.trail_id);
    const GeoPoint pos = trail.polyline.position_at(st.t.arclength);
    for (std::size_t i = 0; i < trail.special_places.size(); ++i) {
      const SpecialPlace& sp = trail.special_places[i];
      if (distance(pos, sp.center) > sp.radius) continue;
      const std::string key = trail.id + "#" + std::to_string(i);
      if (st.visited_specials.count(key)) continue;
      st.visited_specials.insert(key);
      if (movement_rng_.bernoulli(scenario_.params.special_pause_p)) {
        st.pause_until =
            t_ + static_cast<std::int64_t>(movement_rng_.uniform(
                     scenario_.params.pause_min_s, scenario_.params.pause_max_s));
        log("pause", "t" + std::to_string(st.t.id), key);
      }
    }
  }

  void depart(SimTourist& st, const std::string& how) {
    st.t.state = TouristState::Departed;
    st.t.departed_at = t_ + scenario_.params.tick_s;
    ++departures_total_;
    tourists_view_[st.t.id] = st.t;
    log("departure", "t" + std::to_string(st.t.id), how);
  }

  void move_animals() {
    const double dt = static_cast<double>(scenario_.params.tick_s);
    for (auto& a : animals_) {
      a.heading += animals_rng_.normal(0.0, 0.15 * std::sqrt(dt));
      a.location.x += a.speed * dt * std::cos(a.heading);
      a.location.y += a.speed * dt * std::sin(a.heading);
      if (a.location.x < area_.bounds[0] || a.location.x > area_.bounds[2]) {
        a.heading = 3.141592653589793 - a.heading;
        a.location.x = std::clamp(a.location.x, area_.bounds[0], area_.bounds[2]);
      }
      if (a.location.y < area_.bounds[1] || a.location.y > area_.bounds[3]) {
        a.heading = -a.heading;
        a.location.y = std::clamp(a.location.y, area_.bounds[1], area_.bounds[3]);
      }
    }
  }

  // --- arrivals ------------------------------------------------------------

  double mean_group_size() const {
    const auto& sizes = scenario_.params.group_sizes;
    if (sizes.empty()) return 1.0;
    double s = 0.0;
    for (int v : sizes) s += static_cast<double>(v);
    return s / static_cast<double>(sizes.size());
  }

  void spawn_arrivals() {
    const SimParams& p = scenario_.params;
    if (p.peak_concurrent <= 0.0 || entries_.empty()) return;

    const double clock = std::fmod(area_.schedule.clock_hours_at(t_), 24.0);
    double dh = std::abs(clock - p.peak_hour);
    dh = std::min(dh, 24.0 - dh);
    const double shape = std::exp(-dh * dh / (2.0 * p.sigma_hours * p.sigma_hours));
    const double tourists_per_s = p.peak_concurrent / mean_stay_ * shape;

    // Group arrivals bring several tourists at once; thin the event rate so
    // the expected tourist inflow stays on target.
    const double m = mean_group_size();
    const double g = p.group_fraction;
    const double q = g >= 1.0 ? 1.0 : g / (m * (1.0 - g) + g);  // P(event is a group)
    const double tourists_per_event = q * m + (1.0 - q);
    const double event_rate = tourists_per_s / tourists_per_event;

    const int n = arrivals_rng_.poisson(event_rate * static_cast<double>(p.tick_s));
    for (int i = 0; i < n; ++i) spawn_event(q);
  }

  void spawn_event(double group_probability) {
    const SimParams& p = scenario_.params;
    const auto& [trail_id, entry] =
        entries_[static_cast<std::size_t>(arrivals_rng_.uniform_int(
            0, static_cast<std::int64_t>(entries_.size()) - 1))];
    const Trail& trail = area_.trail(trail_id);
    const int direction = entry < trail.polyline.length() * 0.5 ? 1 : -1;

    int members = 1;
    std::optional<int> group_id;
    if (!p.group_sizes.empty() && arrivals_rng_.bernoulli(group_probability)) {
      members = p.group_sizes[static_cast<std::size_t>(arrivals_rng_.uniform_int(
          0, static_cast<std::int64_t>(p.group_sizes.size()) - 1))];
      group_id = next_group_id_++;
    }
    for (int i = 0; i < members; ++i) {
      const double speed = arrivals_rng_.uniform(p.speed_min, p.speed_max);
      const double u = arrivals_rng_.uniform();
      const PhoneMode mode = u < p.p_gps ? PhoneMode::GpsConsent
                             : u < p.p_gps + p.p_gps_refused ? PhoneMode::GpsRefused
                                                             : PhoneMode::BtsOnly;
      inject_tourist(trail_id, entry, direction, speed, mode, group_id);
    }
  }

  const AreaConfig& area_;
  ScenarioSpec scenario_;
  std::uint64_t seed_;
  std::int64_t t_ = 0;

  Rng arrivals_rng_, incidents_rng_, noise_rng_, animals_rng_, movement_rng_;

  std::vector<std::pair<std::string, double>> entries_;
  std::map<std::string, std::vector<JunctionSide>> junctions_by_trail_;
  double mean_stay_ = 3600.0;

  std::map<int, SimTourist> sims_;
  std::map<int, Tourist> tourists_view_;
  std::map<int, Group> groups_;
  std::vector<Animal> animals_;
  std::vector<SimEvent> events_;

  int next_tourist_id_ = 1;
  int next_group_id_ = 1;
  std::size_t next_control_ = 0;
  std::int64_t arrivals_total_ = 0;
  std::int64_t departures_total_ = 0;
};

}  // namespace trailwatch
