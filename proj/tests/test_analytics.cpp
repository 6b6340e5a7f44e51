#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trailwatch/analytics.hpp"
#include "trailwatch/defaults.hpp"

using namespace trailwatch;

namespace {

ContextRow make_row(const std::string& id, double x, double y, const std::string& trail,
                    Difficulty diff = Difficulty::D1, WeatherTags tags = {},
                    DayNight dn = DayNight::Day) {
  ContextRow row;
  row.tourist_id = id;
  row.fix = GeoFix{id, {x, y}, FixSource::Gps, kGpsAccuracy, 0};
  row.trail_id = trail;
  row.difficulty = diff;
  row.tags = tags;
  row.day_night = dn;
  return row;
}

ThreatVerdict make_verdict(const std::string& id, WeatherThreat w,
                           Situational s = Situational::None) {
  ThreatVerdict v;
  v.tourist_id = id;
  v.weather = w;
  v.situational = s;
  return v;
}

CycleReport make_report(std::vector<ContextRow> rows, std::vector<ThreatVerdict> verdicts) {
  CycleReport r;
  r.snapshot.rows = std::move(rows);
  r.verdicts = std::move(verdicts);
  return r;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar statistics
// ---------------------------------------------------------------------------

TEST_CASE("correlation matches hand-computed values") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  std::vector<double> doubled, negated, affine;
  for (double v : x) {
    doubled.push_back(2 * v);
    negated.push_back(-v);
    affine.push_back(3 * v + 7);
  }
  CHECK(pearson(x, doubled) == Catch::Approx(1.0).margin(1e-12));
  CHECK(pearson(x, negated) == Catch::Approx(-1.0).margin(1e-12));
  CHECK(pearson(x, affine) == Catch::Approx(1.0).margin(1e-12));

  // By hand: centered products sum to 10, variances sum to 10 and 14.8,
  // so r = 10 / sqrt(10 * 14.8) = 10 / sqrt(148).
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const std::vector<double> ys{2, 1, 4, 3, 6};
  CHECK(pearson(xs, ys) == Catch::Approx(0.8219949365267865).margin(1e-12));
}

TEST_CASE("correlation rejects degenerate series") {
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS_AS(pearson(x, {5, 5, 5}), UndefinedStatError);
  CHECK_THROWS_AS(pearson({7, 7, 7}, x), UndefinedStatError);
  CHECK_THROWS_AS(pearson({1}, {2}), UndefinedStatError);
  CHECK_THROWS_AS(pearson({}, {}), UndefinedStatError);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), UndefinedStatError);
}

TEST_CASE("summary statistics use the population spread") {
  // Classic textbook set: mean 5, population standard deviation exactly 2.
  const SummaryStats s = summarize({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(s.mean == Catch::Approx(5.0));
  CHECK(s.stddev == Catch::Approx(2.0));
  CHECK(s.min == 2.0);
  CHECK(s.max == 9.0);

  const SummaryStats one = summarize({3.5});
  CHECK(one.mean == 3.5);
  CHECK(one.stddev == 0.0);
  CHECK(one.min == 3.5);
  CHECK(one.max == 3.5);

  CHECK_THROWS_AS(summarize({}), UndefinedStatError);
}

TEST_CASE("solve-time statistics fold totals and squares") {
  ReasoningCounters idle;
  const SolveTimeStats none = solve_time_stats(idle);
  CHECK(none.mean_ms == 0.0);
  CHECK(none.stddev_ms == 0.0);

  // Two calls of 1 ms and 3 ms: mean 2 ms, population stddev 1 ms.
  ReasoningCounters c;
  c.solver_calls = 2;
  c.solve_ns_total = 4'000'000;
  c.solve_ns_sq = 1e12 + 9e12;
  const SolveTimeStats st = solve_time_stats(c);
  CHECK(st.mean_ms == Catch::Approx(2.0).margin(1e-9));
  CHECK(st.stddev_ms == Catch::Approx(1.0).margin(1e-9));
}

// ---------------------------------------------------------------------------
// Context sharing
// ---------------------------------------------------------------------------

namespace {

// Rows that agree on exactly `k` of the seven compared fields, flipping
// fields in a fixed order: wind, fog, temperature, rain, trail, difficulty,
// day/night.
std::pair<ContextRow, ContextRow> rows_sharing(int k) {
  ContextRow a = make_row("t1", 100, 100, "H1");
  ContextRow b = make_row("t2", 200, 200, "H1");
  int flips = 7 - k;
  if (flips-- > 0) b.tags.wind = WindTag::W2;
  if (flips-- > 0) b.tags.fog = FogTag::F2;
  if (flips-- > 0) b.tags.temperature = TempTag::T2;
  if (flips-- > 0) b.tags.rain = RainTag::R2;
  if (flips-- > 0) b.trail_id = "H2";
  if (flips-- > 0) b.difficulty = Difficulty::D2;
  if (flips-- > 0) b.day_night = DayNight::Night;
  return {a, b};
}

}  // namespace

TEST_CASE("sharing fraction counts equal context fields out of seven") {
  for (int k = 0; k <= 7; ++k) {
    const auto [a, b] = rows_sharing(k);
    CHECK(sharing_fraction(a, b) == Catch::Approx(k / 7.0));
  }
  const auto [a, b] = rows_sharing(7);
  CHECK(sharing_fraction(a, a) == 1.0);
  CHECK(sharing_fraction(a, b) == 1.0);
}

TEST_CASE("pair sharing lands in the nearest five-band bucket") {
  // k equal fields out of 7 maps to band round(4k/7).
  const std::size_t expected_band[8] = {0, 1, 1, 2, 2, 3, 3, 4};
  for (int k = 0; k <= 7; ++k) {
    const auto [a, b] = rows_sharing(k);
    RepositorySnapshot snap;
    snap.rows = {a, b};
    const SharingHistogram h = context_sharing_histogram(snap, 100, nullptr);
    std::uint64_t total = 0;
    for (std::size_t band = 0; band < h.size(); ++band) {
      total += h[band];
      CHECK(h[band] == (band == expected_band[k] ? 1u : 0u));
    }
    CHECK(total == 1);
  }
}

TEST_CASE("sharing histogram enumerates small snapshots and samples large ones") {
  RepositorySnapshot empty;
  CHECK(context_sharing_histogram(empty, 100, nullptr) == SharingHistogram{});
  RepositorySnapshot single;
  single.rows = {make_row("t1", 0, 0, "H1")};
  CHECK(context_sharing_histogram(single, 100, nullptr) == SharingHistogram{});

  // Four identical rows enumerate to C(4,2) = 6 pairs, all fully shared.
  RepositorySnapshot four;
  for (int i = 1; i <= 4; ++i) four.rows.push_back(make_row("t" + std::to_string(i), 0, 0, "H1"));
  const SharingHistogram h4 = context_sharing_histogram(four, 100, nullptr);
  CHECK(h4 == SharingHistogram{0, 0, 0, 0, 6});

  // Above the pair budget the histogram holds exactly `max_pairs` samples.
  RepositorySnapshot many;
  for (int i = 1; i <= 100; ++i)
    many.rows.push_back(make_row("t" + std::to_string(i), 0, 0, "H1"));
  Rng rng(7);
  const SharingHistogram hs = context_sharing_histogram(many, 50, &rng);
  CHECK(hs == SharingHistogram{0, 0, 0, 0, 50});

  // Same seed, same histogram; a null sampler forces full enumeration.
  Rng r1(42), r2(42);
  RepositorySnapshot mixed;
  for (int i = 1; i <= 80; ++i) {
    ContextRow row = make_row("t" + std::to_string(i), 0, 0, i % 2 ? "H1" : "H2");
    if (i % 3 == 0) row.tags.wind = WindTag::W3;
    if (i % 5 == 0) row.day_night = DayNight::Night;
    mixed.rows.push_back(row);
  }
  CHECK(context_sharing_histogram(mixed, 64, &r1) == context_sharing_histogram(mixed, 64, &r2));
  const SharingHistogram full = context_sharing_histogram(mixed, 1u << 20, nullptr);
  std::uint64_t total = 0;
  for (auto v : full) total += v;
  CHECK(total == 80u * 79u / 2);
}

// ---------------------------------------------------------------------------
// Run accumulation
// ---------------------------------------------------------------------------

TEST_CASE("cycle observation accumulates verdicts, trails, and station proximity") {
  RunStats stats(default_area());

  // (800,1900) sits inside exactly one station's influence circle;
  // (3000,2500) is covered by all four.
  stats.observe_cycle(make_report(
      {make_row("t1", 800, 1900, "H2"), make_row("t2", 3000, 2500, "H1", Difficulty::D2)},
      {make_verdict("t1", WeatherThreat::E2),
       make_verdict("t2", WeatherThreat::E3,
                    Situational::GroupSeparation | Situational::NoMotion)}));

  CHECK(stats.assessments() == 2);
  CHECK(stats.assessed_tourists() == 2);
  CHECK(stats.weather_totals() == std::array<std::uint64_t, 5>{0, 1, 1, 0, 0});
  CHECK(stats.situational_totals() == std::array<std::uint64_t, 4>{1, 0, 1, 0});
  CHECK(stats.proximity_buckets() == std::array<std::uint64_t, 4>{0, 1, 0, 1});
  REQUIRE(stats.weather_by_trail().count("H2") == 1);
  CHECK(stats.weather_by_trail().at("H2")[1] == 1);
  CHECK(stats.weather_by_trail().at("H1")[2] == 1);

  stats.observe_cycle(make_report({make_row("t1", 800, 1900, "H2")},
                                  {make_verdict("t1", WeatherThreat::E2)}));
  CHECK(stats.assessments() == 3);
  CHECK(stats.assessed_tourists() == 2);
  CHECK(stats.events_per_tourist() == Catch::Approx(1.5));
}

TEST_CASE("context transitions count changes and settle on departure") {
  RunStats stats(default_area());
  auto observe = [&](const ContextRow& row) {
    stats.observe_cycle(make_report({row}, {make_verdict(row.tourist_id, WeatherThreat::E1)}));
  };

  // Three constant cycles, then a tag flip, then a trail change: 2 changes.
  ContextRow r = make_row("t1", 800, 1900, "H2");
  observe(r);
  observe(r);
  observe(r);
  CHECK_FALSE(stats.transition_stats().has_value());  // nobody departed yet

  r.tags.wind = WindTag::W2;
  observe(r);
  r.trail_id = "H1";
  r.difficulty = Difficulty::D2;  // same cycle as the trail change: one transition
  observe(r);

  stats.observe_departures({DepartureEvent{"t1", 150, false}});
  auto ts = stats.transition_stats();
  REQUIRE(ts.has_value());
  CHECK(ts->tourists == 1);
  CHECK(ts->transitions.mean == Catch::Approx(2.0));
  CHECK(ts->transitions.min == 2.0);
  CHECK(ts->transitions.max == 2.0);
  CHECK(ts->transitions.stddev == 0.0);

  // A second tourist with a constant context departs via a report.
  ContextRow q = make_row("t2", 800, 1900, "H2");
  CycleReport rep = make_report({q}, {make_verdict("t2", WeatherThreat::E1)});
  stats.observe_cycle(rep);
  rep.departures = {DepartureEvent{"t2", 180, false}};
  rep.snapshot.rows.clear();
  rep.verdicts.clear();
  stats.observe_cycle(rep);

  ts = stats.transition_stats();
  REQUIRE(ts.has_value());
  CHECK(ts->tourists == 2);
  CHECK(ts->transitions.mean == Catch::Approx(1.0));
  CHECK(ts->transitions.min == 0.0);
  CHECK(ts->transitions.max == 2.0);
  CHECK(ts->transitions.stddev == Catch::Approx(1.0));

  // Departure of a never-observed id changes nothing.
  stats.observe_departures({DepartureEvent{"t99", 200, true}});
  CHECK(stats.transition_stats()->tourists == 2);
}

// ---------------------------------------------------------------------------
// Memory dumps against a live pipeline
// ---------------------------------------------------------------------------

TEST_CASE("memory dumps keep the population and location identities exact") {
  Broker broker;
  ContextRepository repo;
  repo.load_alert_sets(default_alert_sets_text(), "standard");
  CycleDriver driver(default_area(), repo, broker);
  driver.register_group(1, 1, {1, 2});
  RunStats stats(default_area());

  for (const WeatherStation& ws : default_area().weather_stations)
    broker.publish({Topic::Weather, 30, 0, WeatherReadingMsg{ws.id, 2.0, 5000.0, 15.0, 0.0}});
  broker.publish({Topic::GpsTourist, 30, 0, GpsTouristMsg{1, {800, 1900}}});
  broker.publish({Topic::GpsTourist, 30, 0, GpsTouristMsg{2, {1400, 2100}}});

  stats.observe_cycle(driver.run_cycle(30));
  const Dump d1 = stats.take_dump(driver, 300);

  CHECK(d1.index == 1);
  CHECK(d1.at == 300);
  CHECK(d1.clock == default_area().schedule.format_timestamp(300));
  CHECK(d1.total == 2);
  CHECK(d1.left == 0);
  CHECK(d1.current == 2);
  CHECK(d1.total == d1.left + d1.current);
  CHECK(d1.located_gps == 2);
  CHECK(d1.located_bts == 0);
  CHECK(d1.members_located_gps == 2);
  CHECK(d1.members_located_bts == 0);
  CHECK(d1.groups == 1);
  CHECK(d1.group_members == 2);
  CHECK(d1.gps_refused == 0);
  CHECK(d1.assessments == 2);
  std::uint64_t weather_sum = 0;
  for (auto v : d1.weather_cum) weather_sum += v;
  CHECK(weather_sum == d1.assessments);  // each assessment has one level
  CHECK(d1.solver_calls > 0);
  CHECK(d1.solver_starts == 1);
  CHECK(d1.solve_mean_ms >= 0.0);
  CHECK(d1.messages_seen == default_area().weather_stations.size() + 2);
  CHECK(d1.messages_dropped == 0);
  CHECK_FALSE(d1.transitions.has_value());
  // Both rows share the station's tags, the trail, and the clock: one pair
  // at full agreement.
  CHECK(d1.sharing == SharingHistogram{0, 0, 0, 0, 1});

  // A silent cycle keeps everyone tracked; cumulative fields never decrease.
  stats.observe_cycle(driver.run_cycle(60));
  const Dump d2 = stats.take_dump(driver, 600, 5);

  CHECK(d2.index == 2);
  CHECK(d2.gps_refused == 5);
  CHECK(d2.total == d2.left + d2.current);
  CHECK(d2.located_gps + d2.located_bts == d2.current);
  CHECK(d2.assessments == 4);
  CHECK(d2.assessments >= d1.assessments);
  CHECK(d2.solver_calls >= d1.solver_calls);
  CHECK(d2.messages_seen >= d1.messages_seen);
  for (std::size_t i = 0; i < 5; ++i) CHECK(d2.weather_cum[i] >= d1.weather_cum[i]);
  CHECK(stats.dumps().size() == 2);
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

TEST_CASE("dump and report files round-trip their rows") {
  Dump d1;
  d1.index = 1;
  d1.at = 300;
  d1.clock = "05:02:30";
  d1.total = 4;
  d1.left = 1;
  d1.current = 3;
  d1.located_gps = 2;
  d1.located_bts = 1;
  d1.weather_cum = {5, 3, 1, 0, 0};
  d1.assessments = 9;
  Dump d2 = d1;
  d2.index = 2;
  d2.at = 600;
  d2.transitions = TransitionStats{2, SummaryStats{1.5, 1, 2, 0.5}};

  const std::string dumps_path = temp_path("tw_test_dumps.csv");
  write_dumps_csv(dumps_path, {d1, d2});
  const auto lines = read_lines(dumps_path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("index,at,clock,total,left,current", 0) == 0);
  CHECK(lines[1].rfind("1,300,05:02:30,4,1,3,2,1,", 0) == 0);
  CHECK(lines[2].rfind("2,600,", 0) == 0);
  CHECK(lines[2].find("1.500000") != std::string::npos);
  // Every row carries the same number of fields as the header.
  const std::size_t header_commas = count_occurrences(lines[0], ",");
  CHECK(count_occurrences(lines[1], ",") == header_commas);
  CHECK(count_occurrences(lines[2], ",") == header_commas);

  const std::string threats_path = temp_path("tw_test_threats.csv");
  write_threats_csv(threats_path, {{"H1", {1, 2, 3, 0, 0}}, {"H2", {0, 1, 0, 0, 4}}});
  const auto tl = read_lines(threats_path);
  REQUIRE(tl.size() == 4);
  CHECK(tl[0] == "trail,e1,e2,e3,e4,e5");
  CHECK(tl[1] == "H1,1,2,3,0,0");
  CHECK(tl[2] == "H2,0,1,0,0,4");
  CHECK(tl[3] == "TOTAL,1,3,3,0,4");

  const std::string sharing_path = temp_path("tw_test_sharing.csv");
  write_sharing_csv(sharing_path, SharingHistogram{1, 2, 3, 4, 5});
  const auto sl = read_lines(sharing_path);
  REQUIRE(sl.size() == 6);
  CHECK(sl[1] == "0,1");
  CHECK(sl[5] == "100,5");

  const std::string trans_path = temp_path("tw_test_transitions.csv");
  write_transitions_csv(trans_path, TransitionStats{3, SummaryStats{2, 1, 4, 1.25}});
  const auto trl = read_lines(trans_path);
  REQUIRE(trl.size() == 2);
  CHECK(trl[1].rfind("3,2.000000,1.000000,4.000000,1.250000", 0) == 0);
  write_transitions_csv(trans_path, std::nullopt);
  CHECK(read_lines(trans_path)[1] == "0,,,,");

  const std::string prox_path = temp_path("tw_test_proximity.csv");
  write_proximity_csv(prox_path, {0, 3, 2, 1}, 1.5);
  const auto pl = read_lines(prox_path);
  CHECK(pl[1] == "none,0");
  CHECK(pl[2] == "one,3");
  CHECK(pl[4] == "three_plus,1");
  CHECK(pl.back() == "events_per_tourist,1.500000");
}

// ---------------------------------------------------------------------------
// Map rendering
// ---------------------------------------------------------------------------

TEST_CASE("the map renders trails, stations, and verdict markers") {
  RepositorySnapshot snap;
  snap.rows = {make_row("t1", 0, 0, "H2"), make_row("t2", 3000, 2500, "H1")};
  const std::vector<ThreatVerdict> verdicts = {
      make_verdict("t1", WeatherThreat::E1),
      make_verdict("t2", WeatherThreat::E5, Situational::GroupSeparation)};

  const std::string svg = render_map_svg(default_area(), snap, verdicts);
  CHECK(svg.rfind("<svg ", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == default_area().trails.size());
  // One background rectangle plus one square per tower.
  CHECK(count_occurrences(svg, "<rect") == 1 + default_area().bts_stations.size());
  CHECK(svg.find("fill=\"#2e8b57\"") != std::string::npos);   // calm marker
  CHECK(svg.find("fill=\"#111111\"") != std::string::npos);   // severe marker
  CHECK(count_occurrences(svg, "#8a2be2") == 1);              // one situational ring
  // The svg y axis grows downward: local (0,0) lands at the bottom edge.
  CHECK(svg.find("cy=\"5000.0\"") != std::string::npos);
  CHECK(svg.find("<title>t2 E5 E6g</title>") != std::string::npos);

  // Rendering is a pure function of its inputs.
  CHECK(render_map_svg(default_area(), snap, verdicts) == svg);
}
