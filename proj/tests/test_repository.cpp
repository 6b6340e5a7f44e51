#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "trailwatch/defaults.hpp"
#include "trailwatch/repository.hpp"

using namespace trailwatch;

namespace {

ContextRow make_row(const std::string& id, std::int64_t at) {
  ContextRow row;
  row.tourist_id = id;
  row.fix = GeoFix{id, {1000, 2000}, FixSource::Gps, kGpsAccuracy, at};
  row.trail_id = "H1";
  row.difficulty = Difficulty::D2;
  row.updated_at = at;
  return row;
}

}  // namespace

TEST_CASE("alert set parser reads rules, wildcards, and specificity") {
  const std::string text = R"(
# comment
[set a]
E2 * * * = W2 OR W3
E3 * * * = W3
E4 * * * = W3 AND F3
E5 * * * = A5
E2 D4 * Winter = W1 OR W2 OR W3
)";
  const auto sets = parse_alert_sets(text);
  REQUIRE(sets.size() == 1);
  const AlertSet& a = sets.at("a");
  CHECK(a.rules.size() == 5);

  const AlertRule* generic = a.match(WeatherThreat::E2, Difficulty::D1, DayNight::Day,
                                     Season::Summer);
  REQUIRE(generic != nullptr);
  CHECK(generic->specificity() == 0);

  const AlertRule* specific = a.match(WeatherThreat::E2, Difficulty::D4, DayNight::Night,
                                      Season::Winter);
  REQUIRE(specific != nullptr);
  CHECK(specific->specificity() == 5);
  CHECK(specific->formula_text == "W1 OR W2 OR W3");
}

TEST_CASE("alert set parser rejects malformed input") {
  CHECK_THROWS_AS(parse_alert_sets("E2 * * * = W1\n"), ConfigError);  // rule before header
  CHECK_THROWS_AS(parse_alert_sets("[set a]\nE1 * * * = W1\n"), ConfigError);  // E1 not alertable
  CHECK_THROWS_AS(parse_alert_sets("[set a]\nE2 * * = W1\n"), ConfigError);    // short head
  CHECK_THROWS_AS(parse_alert_sets("[set a]\nE2 * * * = W9\n"), ConfigError);  // unknown atom
  CHECK_THROWS_AS(parse_alert_sets("[set a]\nE2 * * *  W1\n"), ConfigError);   // missing '='
  CHECK_THROWS_AS(parse_alert_sets("[set a]\nE2 D5 * * = W1\n"), ConfigError); // bad difficulty
  CHECK_THROWS_AS(parse_alert_sets(""), ConfigError);                          // no sets at all
  CHECK_THROWS_AS(
      parse_alert_sets("[set a]\nE2 * * * = W1\nE2 * * * = W2\n"),
      ConfigError);  // duplicate key
}

TEST_CASE("alert sets must cover every context combination") {
  // Missing E5 entirely: 16 uncovered combinations reported.
  const std::string text = R"(
[set partial]
E2 * * * = W2
E3 * * * = W3
E4 * * * = W3 AND F3
)";
  try {
    parse_alert_sets(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.failures().size() == 16);
  }

  // Only non-wildcard difficulty rows for E5: the other difficulties gape.
  const std::string holes = R"(
[set holey]
E2 * * * = W2
E3 * * * = W3
E4 * * * = W3 AND F3
E5 D4 * * = A5
)";
  CHECK_THROWS_AS(parse_alert_sets(holes), ValidationError);
}

TEST_CASE("shipped alert sets parse and behave monotonically at spot checks") {
  const auto sets = parse_alert_sets(default_alert_sets_text());
  REQUIRE(sets.count("standard") == 1);
  REQUIRE(sets.count("cautious") == 1);

  DpllSolver solver;
  const AlertSet& standard = sets.at("standard");

  // Benign context: nothing fires, not even the lowest alert.
  ContextAtoms benign;
  benign.tags = {WindTag::W1, FogTag::F1, TempTag::T1, RainTag::R1};
  benign.avalanche = Avalanche::A1;
  benign.difficulty = Difficulty::D1;
  for (WeatherThreat level : {WeatherThreat::E2, WeatherThreat::E3, WeatherThreat::E4,
                              WeatherThreat::E5}) {
    const AlertRule* rule =
        standard.match(level, benign.difficulty, benign.day_night, benign.season);
    REQUIRE(rule != nullptr);
    CHECK_FALSE(entails(benign, rule->formula, &solver));
  }

  // Severe winter night on a hard route: the top alert is entailed.
  ContextAtoms severe;
  severe.tags = {WindTag::W3, FogTag::F1, TempTag::T3, RainTag::R1};
  severe.avalanche = Avalanche::A2;
  severe.difficulty = Difficulty::D4;
  severe.day_night = DayNight::Night;
  severe.season = Season::Winter;
  const AlertRule* e5 =
      standard.match(WeatherThreat::E5, severe.difficulty, severe.day_night, severe.season);
  REQUIRE(e5 != nullptr);
  CHECK(entails(severe, e5->formula, &solver));
}

TEST_CASE("mild tags and low avalanche can never reach the two top alerts") {
  // Structural guarantee the calm scenario depends on: with every weather
  // factor at level 1 or 2 and avalanche at most A3, E4 and E5 stay silent
  // regardless of difficulty, time, or season.
  const auto sets = parse_alert_sets(default_alert_sets_text());
  const AlertSet& standard = sets.at("standard");
  DpllSolver solver;
  for (int w = 1; w <= 2; ++w)
    for (int f = 1; f <= 2; ++f)
      for (int t = 1; t <= 2; ++t)
        for (int r = 1; r <= 2; ++r)
          for (int a = 1; a <= 3; ++a)
            for (int d = 1; d <= 4; ++d)
              for (DayNight dn : {DayNight::Day, DayNight::Night})
                for (Season s : {Season::Summer, Season::Winter}) {
                  ContextAtoms row;
                  row.tags = {static_cast<WindTag>(w), static_cast<FogTag>(f),
                              static_cast<TempTag>(t), static_cast<RainTag>(r)};
                  row.avalanche = static_cast<Avalanche>(a);
                  row.difficulty = static_cast<Difficulty>(d);
                  row.day_night = dn;
                  row.season = s;
                  for (WeatherThreat lvl : {WeatherThreat::E4, WeatherThreat::E5}) {
                    const AlertRule* rule = standard.match(lvl, row.difficulty, dn, s);
                    REQUIRE(rule != nullptr);
                    REQUIRE_FALSE(entails(row, rule->formula, &solver));
                  }
                }
}

TEST_CASE("repository round-trips rows and reports previous versions") {
  ContextRepository repo;
  CHECK_FALSE(repo.upsert_row(make_row("t1", 30)).has_value());
  const auto got = repo.row("t1");
  REQUIRE(got.has_value());
  CHECK(got->updated_at == 30);

  ContextRow second = make_row("t1", 60);
  second.off_trail = true;
  const auto previous = repo.upsert_row(second);
  REQUIRE(previous.has_value());
  CHECK(previous->updated_at == 30);
  CHECK_FALSE(previous->off_trail);
  CHECK(repo.row("t1")->off_trail);
  CHECK(repo.row_count() == 1);
  CHECK_FALSE(repo.row("nobody").has_value());
}

TEST_CASE("writes after departure and time regressions are stale") {
  ContextRepository repo;
  repo.upsert_row(make_row("t1", 30));
  const auto final_row = repo.mark_departed("t1");
  REQUIRE(final_row.has_value());
  CHECK(repo.row_count() == 0);
  CHECK_THROWS_AS(repo.upsert_row(make_row("t1", 90)), StaleWriteError);

  repo.upsert_row(make_row("t2", 60));
  CHECK_THROWS_AS(repo.upsert_row(make_row("t2", 30)), StaleWriteError);
  CHECK(repo.row("t2")->updated_at == 60);
}

TEST_CASE("snapshots are isolated and ordered by tourist id") {
  ContextRepository repo;
  repo.load_alert_sets(default_alert_sets_text(), "standard");
  repo.upsert_row(make_row("t2", 30));
  repo.upsert_row(make_row("t1", 30));

  const RepositorySnapshot snap = repo.snapshot();
  REQUIRE(snap.rows.size() == 2);
  CHECK(snap.rows[0].tourist_id == "t1");
  CHECK(snap.rows[1].tourist_id == "t2");
  CHECK(snap.alert_set_name == "standard");
  REQUIRE(snap.alerts != nullptr);
  CHECK(snap.avalanche.level == Avalanche::A1);

  // Later writes stay invisible to the captured snapshot.
  repo.upsert_row(make_row("t3", 60));
  repo.set_avalanche({Avalanche::A4, "op7", 60});
  CHECK(snap.rows.size() == 2);
  CHECK(snap.avalanche.level == Avalanche::A1);
  CHECK(repo.snapshot().rows.size() == 3);
  CHECK(repo.snapshot().avalanche.level == Avalanche::A4);
  CHECK(repo.avalanche().set_by == "op7");

  ContextRepository empty;
  CHECK(empty.snapshot().rows.empty());
}

TEST_CASE("alert set swaps are atomic at snapshot boundaries") {
  ContextRepository repo;
  repo.load_alert_sets(default_alert_sets_text(), "standard");

  const RepositorySnapshot before = repo.snapshot();
  CHECK(repo.swap_alert_set("cautious") == "standard");
  const RepositorySnapshot after = repo.snapshot();

  CHECK(before.alert_set_name == "standard");
  CHECK(after.alert_set_name == "cautious");
  CHECK(before.alerts->name == "standard");  // captured set object unchanged

  CHECK(repo.swap_alert_set("cautious") == "cautious");  // same-name swap is a no-op
  CHECK_THROWS_AS(repo.swap_alert_set("zealous"), NotFoundError);
  CHECK(repo.active_set_name() == "cautious");

  const auto names = repo.alert_set_names();
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "cautious");
  CHECK(names[1] == "standard");
}

TEST_CASE("default area loads with eight fully covered trails") {
  const AreaConfig& area = default_area();
  REQUIRE(area.trails.size() == 8);
  CHECK(area.warnings.empty());  // two-tower coverage everywhere
  CHECK(area.weather_stations.size() == 4);
  CHECK(area.bts_stations.size() == 6);

  // Difficulty mapping is total and uses the whole scale.
  std::set<Difficulty> seen;
  for (const auto& t : area.trails) seen.insert(t.difficulty);
  CHECK(seen.size() == 4);

  // The summit trail H4 has no entry of its own but is reachable through
  // junctions; every other trail has at least one entry.
  CHECK(area.trail("H4").entry_points.empty());
  int with_entries = 0;
  for (const auto& t : area.trails) with_entries += t.entry_points.empty() ? 0 : 1;
  CHECK(with_entries == 7);

  const auto junctions = find_junctions(area);
  bool h1_h4 = false, h4_reachable = false;
  const std::size_t h4 = static_cast<std::size_t>(&area.trail("H4") - &area.trails[0]);
  for (const auto& j : junctions) {
    if (j.trail_a == h4 || j.trail_b == h4) h4_reachable = true;
    if ((area.trails[j.trail_a].id == "H1" && area.trails[j.trail_b].id == "H4") ||
        (area.trails[j.trail_a].id == "H4" && area.trails[j.trail_b].id == "H1")) {
      h1_h4 = true;
      CHECK(distance(j.point, {3000, 2500}) < 1e-6);
    }
  }
  CHECK(h1_h4);
  CHECK(h4_reachable);
}

TEST_CASE("default weather coverage spans one, two, and three-plus station zones") {
  const AreaConfig& area = default_area();
  bool bucket1 = false, bucket2 = false, bucket3 = false;
  for (const auto& t : area.trails) {
    for (double s = 0.0; s <= t.polyline.length(); s += 50.0) {
      const GeoPoint p = t.polyline.position_at(s);
      int in_range = 0;
      for (const auto& ws : area.weather_stations)
        if (distance(p, ws.location) <= ws.influence_radius) ++in_range;
      CHECK(in_range >= 1);  // the selection cascade always has a real candidate
      if (in_range == 1) bucket1 = true;
      if (in_range == 2) bucket2 = true;
      if (in_range >= 3) bucket3 = true;
    }
  }
  CHECK(bucket1);
  CHECK(bucket2);
  CHECK(bucket3);
}
