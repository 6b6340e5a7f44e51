#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/rng.hpp"

namespace trailwatch {

// A coarse dry run of the threat statistics, independent of the full
// pipeline: no geometry, no solver, just declared probabilities applied to a
// synthetic attendance curve. Its purpose is a sanity baseline the full
// system's numbers can later be compared against.

struct PreliminaryParams {
  std::uint64_t seed = 1;
  int readings = 48;           // one per half hour across a full day
  double start_hour = 5.0;     // clock hour of the first reading
  double peak_tourists = 200;  // attendance peak...
  double peak_hour = 14.0;     // ...at this clock hour
  double sigma_hours = 4.0;    // spread of the attendance bell
  double group_fraction = 0.30;

  // Probability that a weather threat fires, per day interval: morning
  // (05-11), afternoon (11-17), evening and night (17-05). The fired level
  // is drawn uniformly from E2..E5.
  std::array<double, 3> p_weather{0.20, 0.24, 0.40};

  double p_separation = 0.05;  // E6g, group members only
  double p_animal = 0.05;      // E6a
  double p_no_motion = 0.05;   // E6m
  double p_off_route = 0.10;   // E6r
};

/// Day interval for a clock hour in [0, 24): 1 morning, 2 afternoon,
/// 3 evening and night.
inline int preliminary_interval(double clock_hour) {
  if (clock_hour >= 5.0 && clock_hour < 11.0) return 1;
  if (clock_hour >= 11.0 && clock_hour < 17.0) return 2;
  return 3;
}

struct PreliminaryRow {
  int index = 0;      // 1-based reading number
  std::string clock;  // HH:MM
  int interval = 0;   // 1..3
  std::uint64_t tourists = 0;
  std::array<std::uint64_t, 4> weather{};      // E2..E5
  std::array<std::uint64_t, 4> situational{};  // E6g, E6a, E6m, E6r
};

/// How often each context category was consulted. Relations serves two
/// checks (animal proximity for everyone, separation for group members), so
/// it always leads; individuality and time are only read when the weather
/// question is actually asked.
struct CategoryCounts {
  std::uint64_t individuality = 0;
  std::uint64_t time_of_day = 0;
  std::uint64_t location = 0;
  std::uint64_t activity = 0;
  std::uint64_t relations = 0;
};

struct PreliminaryReport {
  std::vector<PreliminaryRow> rows;
  CategoryCounts categories;
  std::array<std::uint64_t, 4> weather_totals{};
  std::array<std::uint64_t, 4> situational_totals{};
  std::uint64_t tourist_readings = 0;
  std::uint64_t suppressed_readings = 0;      // tourist-readings with a fired S threat
  std::array<std::uint64_t, 3> interval_draws{};  // weather draws per interval
  std::array<std::uint64_t, 3> interval_hits{};   // fired weather threats per interval
};

inline PreliminaryReport run_preliminary(const PreliminaryParams& p) {
  if (p.readings <= 0) throw ConfigError("preliminary run needs at least one reading");
  PreliminaryReport rep;
  rep.rows.reserve(static_cast<std::size_t>(p.readings));
  Rng rng(p.seed);

  for (int k = 0; k < p.readings; ++k) {
    PreliminaryRow row;
    row.index = k + 1;
    const double h = p.start_hour + 0.5 * k;  // hours since midnight, may exceed 24
    const double clock_hour = std::fmod(h, 24.0);
    char clock[8];
    std::snprintf(clock, sizeof(clock), "%02d:%02d", static_cast<int>(clock_hour),
                  static_cast<int>(std::lround(std::fmod(clock_hour, 1.0) * 60)));
    row.clock = clock;
    row.interval = preliminary_interval(clock_hour);

    const double z = (h - p.peak_hour) / p.sigma_hours;
    row.tourists =
        static_cast<std::uint64_t>(std::lround(p.peak_tourists * std::exp(-0.5 * z * z)));

    for (std::uint64_t i = 0; i < row.tourists; ++i) {
      ++rep.tourist_readings;
      const bool grouped = rng.bernoulli(p.group_fraction);

      // Situational checks first; any hit answers the reading and the
      // weather question is not asked for this tourist.
      rep.categories.relations += grouped ? 2 : 1;
      ++rep.categories.activity;
      ++rep.categories.location;
      const bool e6g = grouped && rng.bernoulli(p.p_separation);
      const bool e6a = rng.bernoulli(p.p_animal);
      const bool e6m = rng.bernoulli(p.p_no_motion);
      const bool e6r = rng.bernoulli(p.p_off_route);
      row.situational[0] += e6g;
      row.situational[1] += e6a;
      row.situational[2] += e6m;
      row.situational[3] += e6r;
      if (e6g || e6a || e6m || e6r) {
        ++rep.suppressed_readings;
        continue;
      }

      ++rep.categories.individuality;
      ++rep.categories.time_of_day;
      const auto slot = static_cast<std::size_t>(row.interval - 1);
      ++rep.interval_draws[slot];
      if (rng.bernoulli(p.p_weather[slot])) {
        ++rep.interval_hits[slot];
        ++row.weather[static_cast<std::size_t>(rng.uniform_int(0, 3))];
      }
    }

    for (std::size_t i = 0; i < 4; ++i) {
      rep.weather_totals[i] += row.weather[i];
      rep.situational_totals[i] += row.situational[i];
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

inline std::string preliminary_csv(const PreliminaryReport& rep) {
  std::string out = "index,clock,interval,tourists,e2,e3,e4,e5,e6g,e6a,e6m,e6r\n";
  for (const PreliminaryRow& r : rep.rows) {
    out += std::to_string(r.index) + "," + r.clock + "," + std::to_string(r.interval) +
           "," + std::to_string(r.tourists);
    for (auto v : r.weather) out += "," + std::to_string(v);
    for (auto v : r.situational) out += "," + std::to_string(v);
    out += "\n";
  }
  return out;
}

/// Human-oriented roll-up printed by the command line tool.
inline std::string preliminary_summary(const PreliminaryReport& rep) {
  std::string out;
  out += "readings: " + std::to_string(rep.rows.size()) + "\n";
  out += "tourist readings: " + std::to_string(rep.tourist_readings) + "\n";
  const char* wl[4] = {"E2", "E3", "E4", "E5"};
  const char* sl[4] = {"E6g", "E6a", "E6m", "E6r"};
  out += "weather threats:";
  for (std::size_t i = 0; i < 4; ++i)
    out += std::string(" ") + wl[i] + "=" + std::to_string(rep.weather_totals[i]);
  out += "\nsituational threats:";
  for (std::size_t i = 0; i < 4; ++i)
    out += std::string(" ") + sl[i] + "=" + std::to_string(rep.situational_totals[i]);
  out += "\ncategory reads: individuality=" + std::to_string(rep.categories.individuality) +
         " time=" + std::to_string(rep.categories.time_of_day) +
         " location=" + std::to_string(rep.categories.location) +
         " activity=" + std::to_string(rep.categories.activity) +
         " relations=" + std::to_string(rep.categories.relations) + "\n";
  for (std::size_t i = 0; i < 3; ++i) {
    const double freq = rep.interval_draws[i]
                            ? static_cast<double>(rep.interval_hits[i]) /
                                  static_cast<double>(rep.interval_draws[i])
                            : 0.0;
    char line[96];
    std::snprintf(line, sizeof(line),
                  "interval %zu: draws=%llu hits=%llu frequency=%.4f\n", i + 1,
                  static_cast<unsigned long long>(rep.interval_draws[i]),
                  static_cast<unsigned long long>(rep.interval_hits[i]), freq);
    out += line;
  }
  return out;
}

}  // namespace trailwatch
