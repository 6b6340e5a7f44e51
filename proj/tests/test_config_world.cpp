#include <catch2/catch_amalgamated.hpp>

#include "trailwatch/config.hpp"
#include "trailwatch/world.hpp"

using namespace trailwatch;

namespace {

// A minimal but complete two-trail area used by most cases here.
const char* kSmallArea = R"(
[area]
name = "test patch"
origin_lat = 49.573
origin_lon = 19.529
bounds = [0, 0, 2000, 2000]
season = "Summer"

[[trail]]
id = "H1"
difficulty = "D2"
points = [[100, 1000], [900, 1000], [1700, 1200]]
entries = [0]

[[trail]]
id = "H2"
difficulty = "D1"
points = [[500, 200], [500, 1800]]
entries = [0, -1]

[[weather_station]]
id = "WS1"
location = [800, 1000]
influence_radius = 1500

[[bts_station]]
id = "B1"
location = [100, 100]
max_range = 3000

[[bts_station]]
id = "B2"
location = [1900, 100]
max_range = 3000

[[bts_station]]
id = "B3"
location = [1000, 1900]
max_range = 3000
)";

}  // namespace

TEST_CASE("config parser reads scalar types, arrays, and nesting") {
  const ConfigTable t = parse_config(R"(
count = 42
ratio = 0.75
label = "a \"quoted\" name\n"
flag = true
off = false
empty = []
nested = [[1, 2], [3, 4]]
multiline = [
  1,
  2,
  3,
]

[alpha]
x = 1

[alpha.beta]
y = 2

[[items]]
v = 1

[[items]]
v = 2
)");
  CHECK(t.values.at("count").as_int() == 42);
  CHECK(t.values.at("ratio").as_double() == 0.75);
  CHECK(t.values.at("label").as_string() == "a \"quoted\" name\n");
  CHECK(t.values.at("flag").as_bool());
  CHECK_FALSE(t.values.at("off").as_bool());
  CHECK(t.values.at("empty").as_array().empty());
  REQUIRE(t.values.at("nested").as_array().size() == 2);
  CHECK(t.values.at("nested").as_array()[1].as_array()[0].as_int() == 3);
  CHECK(t.values.at("multiline").as_array().size() == 3);
  CHECK(t.tables.at("alpha").values.at("x").as_int() == 1);
  CHECK(t.tables.at("alpha").tables.at("beta").values.at("y").as_int() == 2);
  REQUIRE(t.table_arrays.at("items").size() == 2);
  CHECK(t.table_arrays.at("items")[1].values.at("v").as_int() == 2);
}

TEST_CASE("config parser reports line numbers and duplicates") {
  try {
    parse_config("a = 1\nb = ???\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[s]\nx = 1\n[s]\ny = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("a = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("= 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("a = \"unterminated\n"), ConfigError);
}

TEST_CASE("config parser ignores comments and blank lines") {
  const ConfigTable t = parse_config("# heading\n\na = 1  # trailing\n");
  CHECK(t.values.at("a").as_int() == 1);
}

TEST_CASE("table view enforces types and rejects unknown keys") {
  const ConfigTable t = parse_config("a = 1\nb = \"x\"\nstray = 9\n");
  TableView v(t, "root");
  CHECK(v.require_int("a") == 1);
  CHECK(v.require_string("b") == "x");
  CHECK_THROWS_AS(v.require_string("a"), ConfigError);
  CHECK_THROWS_AS(v.require_int("missing"), ConfigError);
  try {
    v.done();
    FAIL("expected unknown-key error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("stray") != std::string::npos);
    CHECK(msg.find("root") != std::string::npos);
  }
}

TEST_CASE("table view optional accessors fall back") {
  const ConfigTable t = parse_config("a = 2\n");
  TableView v(t, "root");
  CHECK(v.optional_double("a", 7.0) == 2.0);
  CHECK(v.optional_double("z", 7.0) == 7.0);
  CHECK(v.optional_string("z", "d") == "d");
  CHECK(v.optional_bool("z", true));
  v.done();
}

TEST_CASE("loading a small area yields validated trails and defaults") {
  const AreaConfig area = load_area(kSmallArea);
  CHECK(area.name == "test patch");
  CHECK(area.season == Season::Summer);
  REQUIRE(area.trails.size() == 2);
  CHECK(area.trail("H1").difficulty == Difficulty::D2);
  CHECK(area.trail("H2").entry_points.size() == 2);
  // -1 means the far end of the trail.
  CHECK(area.trail("H2").entry_points[1] == Catch::Approx(area.trail("H2").polyline.length()));
  CHECK(area.weather_stations.size() == 1);
  CHECK(area.bts_stations.size() == 3);
  CHECK(area.bts_stations[0].path_loss_exponent == 2.5);  // default applies
  CHECK(area.tags.wind_w2 == 8.0);
  CHECK(area.tags.wind_w3 == 17.0);
  CHECK(area.pipeline.off_trail == 50.0);
  CHECK(area.detectors.no_motion_seconds == 900);
  CHECK(area.warnings.empty());  // full coverage: three stations with range 3000
  CHECK_THROWS_AS(area.trail("H9"), NotFoundError);
}

TEST_CASE("area without trails fails validation") {
  const std::string text = R"(
[area]
bounds = [0, 0, 100, 100]
season = "Summer"

[[weather_station]]
id = "WS1"
location = [50, 50]
influence_radius = 100
)";
  CHECK_THROWS_AS(load_area(text), ValidationError);
}

TEST_CASE("one-point trail fails validation") {
  const std::string text = R"(
[area]
bounds = [0, 0, 100, 100]
season = "Summer"

[[trail]]
id = "H1"
difficulty = "D1"
points = [[10, 10]]
entries = [0]

[[weather_station]]
id = "WS1"
location = [50, 50]
influence_radius = 100
)";
  try {
    load_area(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("H1") != std::string::npos);
  }
}

TEST_CASE("validation collects multiple failures at once") {
  const std::string text = R"(
[area]
bounds = [0, 0, 100, 100]
season = "Winter"

[[trail]]
id = "H1"
difficulty = "D1"
points = [[10, 10], [10, 10]]
entries = [0]

[[trail]]
id = "H1"
difficulty = "D9"
points = [[10, 10], [90, 90]]
)";
  try {
    load_area(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.failures().size() >= 3);  // degenerate polyline, duplicate id, bad difficulty, no station
  }
}

TEST_CASE("unknown config keys fail with a path") {
  const std::string text = std::string(kSmallArea) + "\n[area2]\nx = 1\n";
  CHECK_THROWS_AS(load_area(text), ConfigError);

  const std::string bad_season = R"(
[area]
bounds = [0, 0, 100, 100]
season = "Autumn"
)";
  CHECK_THROWS_AS(load_area(bad_season), ConfigError);
}

TEST_CASE("day and night follow the configured half-open window") {
  Schedule sch;  // defaults: start 05:00, 30 clock hours per sim hour, sun 06-20
  CHECK(sch.day_night_clock(14.0) == DayNight::Day);
  CHECK(sch.day_night_clock(23.0) == DayNight::Night);
  CHECK(sch.day_night_clock(20.0) == DayNight::Night);  // sunset itself is night
  CHECK(sch.day_night_clock(6.0) == DayNight::Day);     // sunrise itself is day
  CHECK(sch.day_night_clock(5.999) == DayNight::Night);

  // Simulated-second form: clock = 5 + s / 120.
  CHECK(sch.clock_hours_at(0) == 5.0);
  CHECK(sch.clock_hours_at(3600) == 35.0);
  CHECK(sch.day_night_at(1080) == DayNight::Day);    // 14:00
  CHECK(sch.day_night_at(2160) == DayNight::Night);  // 29:00 -> 05:00 next day
  CHECK(sch.day_night_at(1800) == DayNight::Night);  // 20:00 boundary
}

TEST_CASE("timestamps render clock time with date rollover") {
  Schedule sch;
  CHECK(sch.format_timestamp(1140) == "(19.09.2021,14.30)");  // clock 14.5
  CHECK(sch.format_timestamp(0) == "(19.09.2021,05.00)");
  CHECK(sch.format_timestamp(2880) == "(20.09.2021,05.00)");  // +24 clock hours
  Schedule eom;
  eom.base_day = 30;
  eom.base_month = 9;
  CHECK(eom.format_timestamp(2880) == "(01.10.2021,05.00)");
}

TEST_CASE("junctions are found where trails cross") {
  const AreaConfig area = load_area(kSmallArea);
  const auto junctions = find_junctions(area);
  REQUIRE(junctions.size() == 1);
  const Junction& j = junctions[0];
  CHECK(j.point.x == Catch::Approx(500.0));
  CHECK(j.point.y == Catch::Approx(1000.0));
  // Both trails registered with consistent arclengths.
  const GeoPoint pa = area.trails[j.trail_a].polyline.position_at(j.arclength_a);
  const GeoPoint pb = area.trails[j.trail_b].polyline.position_at(j.arclength_b);
  CHECK(distance(pa, j.point) < 1e-6);
  CHECK(distance(pb, j.point) < 1e-6);
}

TEST_CASE("sparse BTS coverage produces a warning, not a failure") {
  std::string text = R"(
[area]
bounds = [0, 0, 2000, 2000]
season = "Summer"

[[trail]]
id = "H1"
difficulty = "D1"
points = [[100, 1000], [1900, 1000]]
entries = [0]

[[weather_station]]
id = "WS1"
location = [800, 1000]
influence_radius = 1500

[[bts_station]]
id = "B1"
location = [100, 100]
max_range = 1200
)";
  const AreaConfig area = load_area(text);
  REQUIRE_FALSE(area.warnings.empty());
  CHECK(area.warnings[0].find("H1") != std::string::npos);
}

TEST_CASE("schedule section overrides defaults") {
  std::string text = std::string(kSmallArea) + R"(
[schedule]
start_clock_hour = 8
clock_hours_per_sim_hour = 1
sunrise_hour = 7
sunset_hour = 19
base_date = "01.02.2024"
)";
  const AreaConfig area = load_area(text);
  CHECK(area.schedule.start_clock_hour == 8.0);
  CHECK(area.schedule.clock_hours_per_sim_hour == 1.0);
  CHECK(area.schedule.base_day == 1);
  CHECK(area.schedule.base_month == 2);
  CHECK(area.schedule.base_year == 2024);
  CHECK(area.schedule.format_timestamp(1800) == "(01.02.2024,08.30)");
}

TEST_CASE("threshold overrides are validated for ordering") {
  std::string text = std::string(kSmallArea) + R"(
[thresholds]
wind = [10, 9]
)";
  CHECK_THROWS_AS(load_area(text), ValidationError);

  std::string ok = std::string(kSmallArea) + R"(
[thresholds]
wind = [6, 14]
off_trail = 75
)";
  const AreaConfig area = load_area(ok);
  CHECK(area.tags.wind_w2 == 6.0);
  CHECK(area.tags.wind_w3 == 14.0);
  CHECK(area.pipeline.off_trail == 75.0);
}

TEST_CASE("entry points outside the trail fail validation") {
  std::string text = R"(
[area]
bounds = [0, 0, 2000, 2000]
season = "Summer"

[[trail]]
id = "H1"
difficulty = "D1"
points = [[100, 1000], [200, 1000]]
entries = [5000]

[[weather_station]]
id = "WS1"
location = [800, 1000]
influence_radius = 1500
)";
  CHECK_THROWS_AS(load_area(text), ValidationError);
}
