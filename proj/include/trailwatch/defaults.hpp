#pragma once

#include <string>

#include "trailwatch/alerts.hpp"
#include "trailwatch/scenario.hpp"
#include "trailwatch/world.hpp"

namespace trailwatch {

/// Eight-route area used when no config file is given: three junction knots
/// (a saddle at (3000,2500), a summit approach at (4200,3000), a low fork at
/// (3400,800)), one summit trail reachable only via junctions, four weather
/// stations with deliberately uneven coverage, and six towers giving at
/// least two-station coverage on every trail meter.
inline const char* default_area_text() {
  return R"(# Default monitored area.
# Local metric coordinates, meters; origin anchors the lat/lon rendering.

[area]
name = "demo massif"
origin_lat = 49.573
origin_lon = 19.529
bounds = [0, 0, 6000, 5000]
season = "Summer"

[schedule]
start_clock_hour = 5
clock_hours_per_sim_hour = 30
sunrise_hour = 6
sunset_hour = 20
base_date = "19.09.2021"

[[trail]]
id = "H1"
difficulty = "D2"
points = [[200, 2500], [1200, 2600], [2200, 2400], [3000, 2500]]
entries = [0]
special_places = [[2200, 2400, 60]]

[[trail]]
id = "H2"
difficulty = "D1"
points = [[300, 2200], [800, 1900], [1400, 2100], [1800, 2350]]
entries = [0, -1]

[[trail]]
id = "H3"
difficulty = "D2"
points = [[1000, 4500], [1800, 4000], [2600, 3400], [3000, 2600]]
entries = [0]

[[trail]]
id = "H4"
difficulty = "D4"
points = [[3000, 2500], [3600, 2700], [4200, 3000], [4800, 3200]]
special_places = [[4800, 3200, 80]]

[[trail]]
id = "H5"
difficulty = "D3"
points = [[3400, 800], [3700, 1800], [4200, 3000]]
entries = [0]

[[trail]]
id = "H6"
difficulty = "D1"
points = [[5200, 1200], [4600, 1600], [4000, 1800], [3600, 1700]]
entries = [0, -1]

[[trail]]
id = "H7"
difficulty = "D2"
points = [[5600, 2600], [4900, 2800], [4200, 3000]]
entries = [0]

[[trail]]
id = "H8"
difficulty = "D3"
points = [[600, 600], [1600, 900], [2600, 1200], [3400, 800]]
entries = [0]

[[weather_station]]
id = "WS1"
location = [1500, 2500]
influence_radius = 2500

[[weather_station]]
id = "WS2"
location = [2800, 3800]
influence_radius = 2200

[[weather_station]]
id = "WS3"
location = [4300, 2900]
influence_radius = 2000

[[weather_station]]
id = "WS4"
location = [4600, 1400]
influence_radius = 2500

[[bts_station]]
id = "B1"
location = [700, 700]
max_range = 4000
noise_sigma = 0.3

[[bts_station]]
id = "B2"
location = [700, 4300]
max_range = 4000
noise_sigma = 0.3

[[bts_station]]
id = "B3"
location = [3000, 2500]
max_range = 4000
noise_sigma = 0.3

[[bts_station]]
id = "B4"
location = [5300, 700]
max_range = 4000
noise_sigma = 0.3

[[bts_station]]
id = "B5"
location = [5300, 4300]
max_range = 4000
noise_sigma = 0.3

[[bts_station]]
id = "B6"
location = [3000, 300]
max_range = 4000
noise_sigma = 0.3
)";
}

/// Shipped trigger sets. "standard" drives every scenario; "cautious" is the
/// stricter set operators can hot-swap to. All formulas are monotone in
/// severity: raising any tag can only keep or raise the alert level.
inline const char* default_alert_sets_text() {
  return R"(# Alert trigger sets.
# Rule lines: LEVEL DIFFICULTY DAY/NIGHT SEASON = FORMULA
# '*' matches anything; the most specific matching rule wins.

[set standard]
E5 * * * = A5 OR (A4 AND D4) OR (W3 AND F3) OR (W3 AND T3 AND (D3 OR D4))
E4 * * * = A4 OR A5 OR (W3 AND (F2 OR F3)) OR (F3 AND (T2 OR T3)) OR (W3 AND (R2 OR R3)) OR (T3 AND R3)
E3 * * * = A4 OR A5 OR (A3 AND (D3 OR D4)) OR W3 OR F3 OR T3 OR R3 OR ((W2 OR W3) AND (F2 OR F3) AND (D3 OR D4)) OR ((W2 OR W3) AND (T2 OR T3) AND Night)
E2 * * * = A3 OR A4 OR A5 OR W2 OR W3 OR F2 OR F3 OR T2 OR T3 OR R2 OR R3

[set cautious]
E5 * * * = A5 OR (A4 AND (D3 OR D4)) OR (W3 AND F3) OR (W3 AND T3 AND (D3 OR D4))
E4 * * * = A4 OR A5 OR (W3 AND (F2 OR F3)) OR (F3 AND (T2 OR T3)) OR (W3 AND (R2 OR R3)) OR (T3 AND R3) OR (W3 AND Night)
E3 * * * = A4 OR A5 OR (A3 AND (D3 OR D4)) OR W3 OR F3 OR T3 OR R3 OR ((W2 OR W3) AND (F2 OR F3)) OR ((W2 OR W3) AND (T2 OR T3) AND Night)
E2 * * * = A2 OR A3 OR A4 OR A5 OR W2 OR W3 OR F2 OR F3 OR T2 OR T3 OR R2 OR R3 OR (Night AND (D3 OR D4))
)";
}

inline const AreaConfig& default_area() {
  static const AreaConfig area = load_area(default_area_text());
  return area;
}

/// Five shipped environment scenarios. Severity ordering by design:
/// the winter pair (#4, #5) always outranks the summer trio (#1..#3) in mean
/// alert level, and #1 stays mild enough that E4/E5 can never trigger.
inline const char* scenario_text(int id) {
  switch (id) {
    case 1:
      // Changeable summer day: mostly benign, wind and visibility brush their
      // level-2 boundaries only at wave peaks. Nothing ever reaches level 3,
      // avalanche stays at A2.
      return R"([scenario]
id = 1
name = "summer changeable"
season = "Summer"
avalanche = "A2"

[[phase]]
start = 0
wind = 6.5
visibility = 1400.0
temperature = 15.0
rain = 0.6
wind_fluct = 1.5
visibility_fluct = 350.0
temperature_fluct = 3.0
rain_fluct = 0.8
)";
    case 2:
      // Excellent morning, then an abrupt front that parks: all four factors
      // step to a degraded plateau and hold it (no fluctuation, so readings
      // equal the configured values exactly).
      return R"([scenario]
id = 2
name = "summer front moves in"
season = "Summer"
avalanche = "A1"

[[phase]]
start = 0
wind = 4.0
visibility = 5000.0
temperature = 18.0
rain = 0.0

[[phase]]
start = 2100
wind = 18.0
visibility = 600.0
temperature = 4.0
rain = 9.0
)";
    case 3:
      // Mostly excellent with one short violent squall in the middle.
      return R"([scenario]
id = 3
name = "summer squall window"
season = "Summer"
avalanche = "A2"

[[phase]]
start = 0
wind = 4.0
visibility = 5000.0
temperature = 18.0
rain = 0.0

[[phase]]
start = 1200
wind = 22.0
visibility = 120.0
temperature = -1.0
rain = 10.0

[[phase]]
start = 1800
wind = 4.0
visibility = 5000.0
temperature = 18.0
rain = 0.0
)";
    case 4:
      // Rough winter day, factors swinging across their upper boundaries;
      // the avalanche service raises the level mid-run.
      return R"([scenario]
id = 4
name = "winter storm bands"
season = "Winter"
avalanche = "A2"

[[phase]]
start = 0
wind = 14.0
visibility = 450.0
temperature = -12.0
rain = 5.0
wind_fluct = 4.0
visibility_fluct = 300.0
temperature_fluct = 4.0
rain_fluct = 4.0

[[control]]
at = 1800
avalanche = "A3"
)";
    case 5:
      // Severe winter whiteout that then improves monotonically; a short
      // A4 spike early, downgraded as conditions ease.
      return R"([scenario]
id = 5
name = "winter whiteout easing"
season = "Winter"
avalanche = "A3"

[[phase]]
start = 0
wind = 25.0
visibility = 100.0
temperature = -18.0
rain = 10.0

[[phase]]
start = 1500
ramp = true
wind = 6.0
visibility = 2000.0
temperature = -2.0
rain = 0.5

[[control]]
at = 300
avalanche = "A4"

[[control]]
at = 1200
avalanche = "A3"
)";
    default:
      throw NotFoundError("no shipped scenario with id " + std::to_string(id));
  }
}

inline ScenarioSpec default_scenario(int id) { return parse_scenario(scenario_text(id)); }

}  // namespace trailwatch
