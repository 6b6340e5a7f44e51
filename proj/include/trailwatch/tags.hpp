#pragma once

#include <cstdint>
#include <string>

#include "trailwatch/error.hpp"

namespace trailwatch {

// Fixed vocabulary of the context model. Parse/format helpers live next to
// each enum; everything round-trips exactly, which the text formats rely on.

enum class WindTag : std::uint8_t { W1 = 1, W2 = 2, W3 = 3 };
enum class FogTag : std::uint8_t { F1 = 1, F2 = 2, F3 = 3 };   // visibility
enum class TempTag : std::uint8_t { T1 = 1, T2 = 2, T3 = 3 };  // coldness
enum class RainTag : std::uint8_t { R1 = 1, R2 = 2, R3 = 3 };

struct WeatherTags {
  WindTag wind = WindTag::W1;
  FogTag fog = FogTag::F1;
  TempTag temperature = TempTag::T1;
  RainTag rain = RainTag::R1;

  friend bool operator==(const WeatherTags&, const WeatherTags&) = default;
};

enum class Difficulty : std::uint8_t { D1 = 1, D2 = 2, D3 = 3, D4 = 4 };
enum class Avalanche : std::uint8_t { A1 = 1, A2 = 2, A3 = 3, A4 = 4, A5 = 5 };
enum class DayNight : std::uint8_t { Day, Night };
enum class Season : std::uint8_t { Summer, Winter };

/// Weather threat verdict levels; E1 means "no threat".
enum class WeatherThreat : std::uint8_t { E1 = 1, E2 = 2, E3 = 3, E4 = 4, E5 = 5 };

/// Situational (non-weather) threat flags, combinable per cycle.
enum class Situational : std::uint8_t {
  None = 0,
  GroupSeparation = 1u << 0,  // E6g
  AnimalProximity = 1u << 1,  // E6a
  NoMotion = 1u << 2,         // E6m
  OffRoute = 1u << 3,         // E6r
};

inline Situational operator|(Situational a, Situational b) {
  return static_cast<Situational>(static_cast<std::uint8_t>(a) |
                                  static_cast<std::uint8_t>(b));
}
inline Situational& operator|=(Situational& a, Situational b) { return a = a | b; }
inline bool has(Situational set, Situational flag) {
  return (static_cast<std::uint8_t>(set) & static_cast<std::uint8_t>(flag)) != 0;
}

inline std::string to_string(WindTag v) { return "W" + std::to_string(int(v)); }
inline std::string to_string(FogTag v) { return "F" + std::to_string(int(v)); }
inline std::string to_string(TempTag v) { return "T" + std::to_string(int(v)); }
inline std::string to_string(RainTag v) { return "R" + std::to_string(int(v)); }
inline std::string to_string(Difficulty v) { return "D" + std::to_string(int(v)); }
inline std::string to_string(Avalanche v) { return "A" + std::to_string(int(v)); }
inline std::string to_string(DayNight v) { return v == DayNight::Day ? "Day" : "Night"; }
inline std::string to_string(Season v) { return v == Season::Summer ? "Summer" : "Winter"; }
inline std::string to_string(WeatherThreat v) { return "E" + std::to_string(int(v)); }

namespace detail {
inline int parse_leveled(const std::string& s, char prefix, int lo, int hi,
                         const char* what) {
  if (s.size() == 2 && s[0] == prefix && s[1] >= '0' + lo && s[1] <= '0' + hi)
    return s[1] - '0';
  throw VocabularyError(std::string("unknown ") + what + " label: '" + s + "'");
}
}  // namespace detail

inline Difficulty parse_difficulty(const std::string& s) {
  return Difficulty(detail::parse_leveled(s, 'D', 1, 4, "difficulty"));
}
inline Avalanche parse_avalanche(const std::string& s) {
  return Avalanche(detail::parse_leveled(s, 'A', 1, 5, "avalanche level"));
}
inline WeatherThreat parse_weather_threat(const std::string& s) {
  return WeatherThreat(detail::parse_leveled(s, 'E', 1, 5, "weather threat"));
}
inline Season parse_season(const std::string& s) {
  if (s == "Summer") return Season::Summer;
  if (s == "Winter") return Season::Winter;
  throw VocabularyError("unknown season: '" + s + "'");
}
inline DayNight parse_day_night(const std::string& s) {
  if (s == "Day") return DayNight::Day;
  if (s == "Night") return DayNight::Night;
  throw VocabularyError("unknown day/night value: '" + s + "'");
}

/// Situational labels in a stable order (used for journal lines and reports).
inline std::string situational_labels(Situational s, const char* sep = ",") {
  std::string out;
  auto add = [&](Situational f, const char* name) {
    if (!has(s, f)) return;
    if (!out.empty()) out += sep;
    out += name;
  };
  add(Situational::GroupSeparation, "E6g");
  add(Situational::AnimalProximity, "E6a");
  add(Situational::NoMotion, "E6m");
  add(Situational::OffRoute, "E6r");
  return out;
}

}  // namespace trailwatch
