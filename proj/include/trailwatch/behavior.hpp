#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trailwatch/automata.hpp"
#include "trailwatch/geo.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

/// One assessed point of a tourist's stay: the tuple
/// (id, th, geo, ts, trail, difficulty) serialized one per line.
struct BehaviorPoint {
  std::string tourist_id;
  std::string th;         // token string over the threat alphabet, e.g. "E6mE3"
  double lat = 0.0;
  double lon = 0.0;
  std::string timestamp;  // "(19.09.2021,14.30)" style environment clock
  std::string trail_id;
  Difficulty difficulty = Difficulty::D1;
};

/// What one reasoning cycle concluded for one tourist. `located` is false
/// when the cycle had no usable position row; such cycles leave no point.
struct CycleAssessment {
  std::uint64_t cycle = 0;
  bool located = true;
  WeatherThreat weather = WeatherThreat::E1;
  Situational situational = Situational::None;
  double lat = 0.0;
  double lon = 0.0;
  std::string timestamp;
  std::string trail_id;
  Difficulty difficulty = Difficulty::D1;
};

/// The single situational token reported in `th`. Movement threats trump
/// route deviation, which trumps animal proximity, which trumps group
/// separation; the full set stays available on the verdict record.
inline const char* dominant_situational_label(Situational s) {
  if (has(s, Situational::NoMotion)) return token_label(ThreatToken::E6m);
  if (has(s, Situational::OffRoute)) return token_label(ThreatToken::E6r);
  if (has(s, Situational::AnimalProximity)) return token_label(ThreatToken::E6a);
  if (has(s, Situational::GroupSeparation)) return token_label(ThreatToken::E6g);
  return "";
}

/// Token string for one assessment: situational part first, then weather
/// part ("E6mE3"). A cycle with nothing to report is the plain N token.
inline std::string th_string(WeatherThreat weather, Situational situational) {
  std::string out = dominant_situational_label(situational);
  switch (weather) {
    case WeatherThreat::E1:
      break;  // no weather token
    case WeatherThreat::E2:
      out += token_label(ThreatToken::E2);
      break;
    case WeatherThreat::E3:
      out += token_label(ThreatToken::E3);
      break;
    case WeatherThreat::E4:
      out += token_label(ThreatToken::E4);
      break;
    case WeatherThreat::E5:
      out += token_label(ThreatToken::E5);
      break;
  }
  if (out.empty()) out = token_label(ThreatToken::N);
  return out;
}

/// One point per located cycle, ordered by cycle. Unlocated cycles are
/// omitted entirely: N would claim an assessment that never happened.
inline std::vector<BehaviorPoint> build_behavior_trace(
    const std::string& tourist_id, const std::vector<CycleAssessment>& cycles) {
  std::vector<BehaviorPoint> trace;
  for (const CycleAssessment& c : cycles) {
    if (!c.located) continue;
    BehaviorPoint p;
    p.tourist_id = tourist_id;
    p.th = th_string(c.weather, c.situational);
    p.lat = c.lat;
    p.lon = c.lon;
    p.timestamp = c.timestamp;
    p.trail_id = c.trail_id;
    p.difficulty = c.difficulty;
    trace.push_back(std::move(p));
  }
  return trace;
}

/// Token sequence of a whole trace: each point's th tokens followed by the
/// separator. This is the exact input the trace acceptor validates.
inline std::vector<ThreatToken> trace_tokens(const std::vector<BehaviorPoint>& trace) {
  std::vector<ThreatToken> tokens;
  for (const BehaviorPoint& p : trace) {
    for (ThreatToken t : tokenize_threats(p.th)) tokens.push_back(t);
    tokens.push_back(ThreatToken::Sep);
  }
  return tokens;
}

/// Tab-separated export line in tuple order id, th, geo, ts, trail,
/// difficulty. Geo renders as a DMS pair.
inline std::string behavior_point_line(const BehaviorPoint& p) {
  std::string out = p.tourist_id;
  out += '\t';
  out += p.th;
  out += "\t(";
  out += format_dms(p.lat, /*is_lat=*/true);
  out += ',';
  out += format_dms(p.lon, /*is_lat=*/false);
  out += ")\t";
  out += p.timestamp;
  out += '\t';
  out += p.trail_id;
  out += '\t';
  out += to_string(p.difficulty);
  return out;
}

}  // namespace trailwatch
