#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "trailwatch/alerts.hpp"
#include "trailwatch/logic.hpp"
#include "trailwatch/repository.hpp"
#include "trailwatch/tags.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

/// Outcome of one tourist's assessment in one cycle: a single weather level
/// (E1 = no weather threat) plus any combination of situational threats.
struct ThreatVerdict {
  std::string tourist_id;
  WeatherThreat weather = WeatherThreat::E1;
  Situational situational = Situational::None;
  std::uint64_t cycle = 0;
  std::int64_t timestamp = 0;
};

struct ReasoningCounters {
  std::uint64_t solver_calls = 0;   // individual entailment checks
  std::uint64_t solver_starts = 0;  // cycles in which the solver ran at all
  std::uint64_t solve_ns_total = 0; // wall time spent inside entailment checks
  double solve_ns_sq = 0.0;         // sum of squared per-call times, for spread
};

inline bool inside_special_place(const GeoPoint& p, const Trail* trail) {
  if (!trail) return false;
  for (const SpecialPlace& sp : trail->special_places)
    if (distance(p, sp.center) <= sp.radius) return true;
  return false;
}

/// Non-weather detectors. Each one fires independently; a dwell inside a
/// special place is expected behavior and never counts as a motion threat.
inline Situational a3_detect_nonweather(const ContextRow& row,
                                        const DetectorThresholds& det,
                                        const AreaConfig& area) {
  Situational s = Situational::None;
  if (row.group_leader_distance && *row.group_leader_distance > det.group_distance)
    s |= Situational::GroupSeparation;
  if (row.animal_distance && *row.animal_distance < det.animal_distance)
    s |= Situational::AnimalProximity;
  if (row.motion_idle_seconds > det.no_motion_seconds &&
      !inside_special_place(row.fix.point, area.find_trail(row.trail_id)))
    s |= Situational::NoMotion;
  if (row.off_trail) s |= Situational::OffRoute;
  return s;
}

inline ContextAtoms atoms_for_row(const ContextRow& row, Avalanche avalanche) {
  ContextAtoms a;
  a.tags = row.tags;
  a.avalanche = avalanche;
  a.difficulty = row.difficulty;
  a.day_night = row.day_night;
  a.season = row.season;
  return a;
}

/// First-hit-wins entailment cascade from the most severe level down. Levels
/// below a hit are never checked, so a cycle costs between one and four
/// solver calls per tourist.
inline WeatherThreat weather_cascade(const ContextAtoms& atoms, const AlertSet& set,
                                     DpllSolver* solver, ReasoningCounters* counters) {
  static constexpr WeatherThreat kOrder[] = {WeatherThreat::E5, WeatherThreat::E4,
                                             WeatherThreat::E3, WeatherThreat::E2};
  for (WeatherThreat level : kOrder) {
    const AlertRule* rule = set.match(level, atoms.difficulty, atoms.day_night, atoms.season);
    if (!rule) continue;  // unreachable for validated sets; stay safe anyway
    bool hit;
    if (counters) {
      ++counters->solver_calls;
      const auto t0 = std::chrono::steady_clock::now();
      hit = entails(atoms, rule->formula, solver);
      const auto ns = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(
              std::chrono::steady_clock::now() - t0)
              .count());
      counters->solve_ns_total += ns;
      counters->solve_ns_sq += static_cast<double>(ns) * static_cast<double>(ns);
    } else {
      hit = entails(atoms, rule->formula, solver);
    }
    if (hit) return level;
  }
  return WeatherThreat::E1;
}

/// One reasoning pass over an immutable snapshot: per-tourist detectors plus
/// the weather cascade, in repository (id) order. The snapshot's avalanche
/// level applies to every row regardless of what was stamped at write time.
inline std::vector<ThreatVerdict> evaluate_snapshot(const RepositorySnapshot& snap,
                                                    const AreaConfig& area,
                                                    std::uint64_t cycle, std::int64_t now,
                                                    DpllSolver* solver,
                                                    ReasoningCounters* counters) {
  std::vector<ThreatVerdict> out;
  out.reserve(snap.rows.size());
  std::uint64_t calls_before = counters ? counters->solver_calls : 0;
  for (const ContextRow& row : snap.rows) {
    ThreatVerdict v;
    v.tourist_id = row.tourist_id;
    v.cycle = cycle;
    v.timestamp = now;
    v.situational = a3_detect_nonweather(row, area.detectors, area);
    v.weather = weather_cascade(atoms_for_row(row, snap.avalanche.level), *snap.alerts,
                                solver, counters);
    out.push_back(std::move(v));
  }
  if (counters && counters->solver_calls > calls_before) ++counters->solver_starts;
  return out;
}

}  // namespace trailwatch
