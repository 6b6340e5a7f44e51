#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "trailwatch/defaults.hpp"
#include "trailwatch/pipeline.hpp"

using namespace trailwatch;

namespace {

// A broker, a repository with the shipped alert sets, and a driver wired to
// both. Tests publish hand-built messages and step cycles explicitly.
struct Rig {
  Broker broker;
  ContextRepository repo;
  CycleDriver driver;

  explicit Rig(RunJournal* j = nullptr)
      : driver(default_area(), repo, broker, j, std::nullopt) {
    repo.load_alert_sets(default_alert_sets_text(), "standard");
  }

  void weather(std::int64_t t, const std::string& station, double wind, double vis,
               double temp, double rain) {
    broker.publish({Topic::Weather, t, 0, WeatherReadingMsg{station, wind, vis, temp, rain}});
  }

  void benign_weather(std::int64_t t) {
    for (const WeatherStation& ws : default_area().weather_stations)
      weather(t, ws.id, 2.0, 5000.0, 15.0, 0.0);
  }

  void gps(std::int64_t t, int tourist, double x, double y) {
    broker.publish({Topic::GpsTourist, t, 0, GpsTouristMsg{tourist, {x, y}}});
  }

  /// Noise-free tower measurements for a phone at a known point.
  void bts_exact(std::int64_t t, int phone, GeoPoint p,
                 const std::vector<std::string>& stations) {
    for (const std::string& id : stations) {
      const BtsStation* b = nullptr;
      for (const BtsStation& s : default_area().bts_stations)
        if (s.id == id) b = &s;
      REQUIRE(b != nullptr);
      broker.publish({Topic::BtsMeasurement, t, 0,
                      BtsSignalMsg{id, phone, rssi_from_distance(*b, distance(b->location, p))}});
    }
  }

  void animal(std::int64_t t, int id, double x, double y, bool dangerous) {
    broker.publish({Topic::GpsAnimal, t, 0, GpsAnimalMsg{id, {x, y}, dangerous}});
  }

  void set_avalanche(std::int64_t t, Avalanche level) {
    ControlMsg c;
    c.kind = ControlMsg::Kind::SetAvalanche;
    c.avalanche = level;
    broker.publish({Topic::Control, t, 0, c});
  }

  void swap_alerts(std::int64_t t, const std::string& name) {
    ControlMsg c;
    c.kind = ControlMsg::Kind::SwapAlertSet;
    c.alert_set_name = name;
    broker.publish({Topic::Control, t, 0, c});
  }
};

const ThreatVerdict* find_verdict(const CycleReport& r, const std::string& id) {
  for (const ThreatVerdict& v : r.verdicts)
    if (v.tourist_id == id) return &v;
  return nullptr;
}

// Mid-trail point on H2, far from every entry, covered by exactly one
// weather station (WS1).
constexpr double kMidX = 800, kMidY = 1900;

}  // namespace

TEST_CASE("a satellite fix is located, stored, and assessed in its cycle") {
  Rig rig;
  rig.benign_weather(30);
  rig.gps(30, 1, kMidX, kMidY);
  const CycleReport r = rig.driver.run_cycle(30);

  REQUIRE(r.arrivals.size() == 1);
  CHECK(r.arrivals[0].tourist_id == "t1");
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].tourist_id == "t1");
  CHECK(r.verdicts[0].weather == WeatherThreat::E1);
  CHECK(r.verdicts[0].situational == Situational::None);

  const auto row = rig.repo.row("t1");
  REQUIRE(row.has_value());
  CHECK(row->trail_id == "H2");
  CHECK(row->difficulty == Difficulty::D1);
  CHECK(row->fix.source == FixSource::Gps);
  CHECK(row->selected_station == "WS1");
  CHECK_FALSE(row->off_trail);

  const auto& trace = rig.driver.traces().at("t1");
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].cycle == 1);
  CHECK(trace[0].trail_id == "H2");
  CHECK(trace[0].timestamp == default_area().schedule.format_timestamp(30));
  CHECK(trace[0].lat != 0.0);
  CHECK(trace[0].lon != 0.0);

  CHECK(rig.driver.counters().messages_seen == 5);
  CHECK(rig.driver.counters().one_station_events == 1);
}

TEST_CASE("several reachable stations do not count as single-station events") {
  Rig rig;
  // (3000, 2500) sits inside all four stations' influence circles.
  rig.gps(30, 1, 3000, 2500);
  rig.driver.run_cycle(30);
  CHECK(rig.driver.counters().one_station_events == 0);
}

TEST_CASE("a weather change shifts the verdict exactly one cycle later") {
  Rig rig;
  rig.benign_weather(30);
  rig.gps(30, 1, kMidX, kMidY);
  const CycleReport r1 = rig.driver.run_cycle(30);
  CHECK(find_verdict(r1, "t1")->weather == WeatherThreat::E1);

  // Strong wind at the tourist's station, published after cycle 1.
  rig.weather(60, "WS1", 20.0, 5000.0, 15.0, 0.0);
  rig.gps(60, 1, kMidX + 31, kMidY + 10);
  const CycleReport r2 = rig.driver.run_cycle(60);
  CHECK(find_verdict(r2, "t1")->weather == WeatherThreat::E3);

  // Calm again: the verdict follows at the very next evaluation.
  rig.weather(90, "WS1", 2.0, 5000.0, 15.0, 0.0);
  rig.gps(90, 1, kMidX + 62, kMidY + 20);
  const CycleReport r3 = rig.driver.run_cycle(90);
  CHECK(find_verdict(r3, "t1")->weather == WeatherThreat::E1);
}

TEST_CASE("cycles without new messages repeat the previous verdicts") {
  Rig rig;
  rig.benign_weather(30);
  rig.gps(30, 1, kMidX, kMidY);
  const CycleReport r1 = rig.driver.run_cycle(30);

  const CycleReport r2 = rig.driver.run_cycle(60);  // silence, within timeout
  REQUIRE(r2.verdicts.size() == r1.verdicts.size());
  for (std::size_t i = 0; i < r1.verdicts.size(); ++i) {
    CHECK(r2.verdicts[i].tourist_id == r1.verdicts[i].tourist_id);
    CHECK(r2.verdicts[i].weather == r1.verdicts[i].weather);
    CHECK(r2.verdicts[i].situational == r1.verdicts[i].situational);
  }
  CHECK(r2.arrivals.empty());
  CHECK(r2.departures.empty());
  CHECK(rig.repo.snapshot().rows.size() == 1);
}

TEST_CASE("silence at an entry region is a clean departure") {
  Rig rig;
  rig.gps(30, 1, 300, 2200);  // the H2 trailhead itself
  rig.driver.run_cycle(30);
  REQUIRE(rig.repo.row("t1").has_value());

  const CycleReport r = rig.driver.run_cycle(660);  // 630 s of silence
  REQUIRE(r.departures.size() == 1);
  CHECK(r.departures[0].tourist_id == "t1");
  CHECK_FALSE(r.departures[0].lost_signal);
  CHECK(r.verdicts.empty());
  CHECK_FALSE(rig.repo.row("t1").has_value());
}

TEST_CASE("silence away from the entries is a lost signal") {
  Rig rig;
  rig.gps(30, 1, kMidX, kMidY);
  rig.driver.run_cycle(30);

  const CycleReport r = rig.driver.run_cycle(660);
  REQUIRE(r.departures.size() == 1);
  CHECK(r.departures[0].tourist_id == "t1");
  CHECK(r.departures[0].lost_signal);
}

TEST_CASE("the run closeout departs only tourists parked at an entry") {
  Rig rig;
  rig.gps(30, 1, 300, 2200);   // at the H2 trailhead
  rig.gps(30, 2, kMidX, kMidY);  // mid-trail
  rig.driver.run_cycle(30);

  const auto closed = rig.driver.finish(40);
  REQUIRE(closed.size() == 1);
  CHECK(closed[0].tourist_id == "t1");
  CHECK_FALSE(closed[0].lost_signal);
  CHECK_FALSE(rig.repo.row("t1").has_value());
  CHECK(rig.repo.row("t2").has_value());
}

TEST_CASE("tower-only members borrow their co-members' satellite fixes") {
  Rig rig;
  rig.driver.register_group(1, 1, {1, 2});
  rig.gps(30, 1, 850, 1925);                          // leader, satellite
  rig.bts_exact(30, 2, {kMidX, kMidY}, {"B1", "B2", "B3"});  // member, towers only
  const CycleReport r = rig.driver.run_cycle(30);

  REQUIRE(r.verdicts.size() == 2);
  const auto member = rig.repo.row("t2");
  REQUIRE(member.has_value());
  CHECK(member->fix.source == FixSource::GroupImproved);
  CHECK(member->fix.accuracy == Catch::Approx(kBtsAccuracy / 2.0));
  CHECK(member->trail_id == "H2");
  // The improved position is pulled along the trail toward the leader.
  CHECK(member->fix.point.x > kMidX);
  CHECK(member->fix.point.x < 850);
  CHECK(rig.driver.counters().group_improvements == 1);
  CHECK(rig.driver.counters().low_accuracy_events == 0);

  // Close together: no separation flag on either side.
  CHECK(find_verdict(r, "t1")->situational == Situational::None);
  CHECK(find_verdict(r, "t2")->situational == Situational::None);
}

TEST_CASE("leader separation flags the member, never the leader") {
  Rig rig;
  rig.driver.register_group(2, 5, {5, 6});
  rig.gps(30, 5, kMidX, kMidY);
  rig.gps(30, 6, 1400, 2100);  // 632 m along the same trail
  const CycleReport r = rig.driver.run_cycle(30);

  CHECK(find_verdict(r, "t5")->situational == Situational::None);
  CHECK(find_verdict(r, "t6")->situational == Situational::GroupSeparation);
}

TEST_CASE("dangerous animals flag only tourists within the radius") {
  Rig rig;
  rig.gps(30, 1, kMidX, kMidY);
  rig.gps(30, 2, 1400, 2100);
  rig.animal(30, 1, kMidX + 20, kMidY + 15, true);   // 25 m from t1
  rig.animal(30, 2, 1400 + 10, 2100, false);         // harmless, 10 m from t2
  const CycleReport r = rig.driver.run_cycle(30);

  CHECK(find_verdict(r, "t1")->situational == Situational::AnimalProximity);
  CHECK(find_verdict(r, "t2")->situational == Situational::None);
}

TEST_CASE("standing still long enough raises the no-motion flag") {
  Rig rig;
  std::int64_t t = 30;
  rig.gps(t, 1, kMidX, kMidY);
  CycleReport r = rig.driver.run_cycle(t);

  // Idle accrues between consecutive fixes at the same spot: the threshold
  // (900 s, strict) falls between the 30th and 31st repeat.
  for (int i = 0; i < 30; ++i) {
    t += 30;
    rig.gps(t, 1, kMidX, kMidY);
    r = rig.driver.run_cycle(t);
  }
  CHECK(rig.repo.row("t1")->motion_idle_seconds == 900);
  CHECK(find_verdict(r, "t1")->situational == Situational::None);

  t += 30;
  rig.gps(t, 1, kMidX, kMidY);
  r = rig.driver.run_cycle(t);
  CHECK(find_verdict(r, "t1")->situational == Situational::NoMotion);

  // A real step resets the clock.
  t += 30;
  rig.gps(t, 1, kMidX + 30, kMidY + 15);
  r = rig.driver.run_cycle(t);
  CHECK(find_verdict(r, "t1")->situational == Situational::None);
  CHECK(rig.repo.row("t1")->motion_idle_seconds == 0);
}

TEST_CASE("a dwell inside a rest area never counts as no motion") {
  Rig rig;
  const GeoPoint rest = default_area().trail("H1").special_places.at(0).center;
  std::int64_t t = 30;
  rig.gps(t, 1, rest.x, rest.y);
  CycleReport r = rig.driver.run_cycle(t);
  for (int i = 0; i < 35; ++i) {
    t += 30;
    rig.gps(t, 1, rest.x, rest.y);
    r = rig.driver.run_cycle(t);
  }
  CHECK(rig.repo.row("t1")->motion_idle_seconds > 900);
  CHECK(rig.repo.row("t1")->trail_id == "H1");
  CHECK(find_verdict(r, "t1")->situational == Situational::None);
}

TEST_CASE("an avalanche bulletin lifts verdicts at the next evaluation") {
  Rig rig;
  rig.benign_weather(30);
  rig.gps(30, 1, kMidX, kMidY);
  const CycleReport r1 = rig.driver.run_cycle(30);
  CHECK(find_verdict(r1, "t1")->weather == WeatherThreat::E1);

  rig.set_avalanche(45, Avalanche::A4);
  rig.gps(60, 1, kMidX + 31, kMidY + 10);
  const CycleReport r2 = rig.driver.run_cycle(60);
  CHECK(find_verdict(r2, "t1")->weather == WeatherThreat::E4);
  CHECK(rig.repo.avalanche().level == Avalanche::A4);
  CHECK(rig.repo.avalanche().set_at == 45);
}

TEST_CASE("alert set swaps change how the same context reads") {
  Rig rig;
  rig.benign_weather(30);
  rig.set_avalanche(20, Avalanche::A2);
  rig.gps(30, 1, kMidX, kMidY);
  const CycleReport r1 = rig.driver.run_cycle(30);
  CHECK(find_verdict(r1, "t1")->weather == WeatherThreat::E1);  // standard: A2 is quiet

  rig.swap_alerts(45, "cautious");
  rig.gps(60, 1, kMidX + 31, kMidY + 10);
  const CycleReport r2 = rig.driver.run_cycle(60);
  CHECK(find_verdict(r2, "t1")->weather == WeatherThreat::E2);  // cautious: A2 warns

  const auto dropped_before = rig.driver.counters().messages_dropped;
  rig.swap_alerts(75, "no-such-set");
  rig.gps(90, 1, kMidX + 62, kMidY + 20);
  const CycleReport r3 = rig.driver.run_cycle(90);
  CHECK(rig.driver.counters().messages_dropped == dropped_before + 1);
  CHECK(find_verdict(r3, "t1")->weather == WeatherThreat::E2);  // cautious stays active
}

TEST_CASE("a single tower and no satellite is unlocatable") {
  Rig rig;
  rig.bts_exact(30, 9, {kMidX, kMidY}, {"B1"});
  const CycleReport r = rig.driver.run_cycle(30);
  CHECK(r.verdicts.empty());
  CHECK(r.arrivals.empty());
  CHECK(rig.driver.counters().unlocatable == 1);
  CHECK_FALSE(rig.repo.row("t9").has_value());
}

TEST_CASE("identical message scripts journal identically") {
  auto script = [](Rig& rig) {
    rig.benign_weather(30);
    rig.gps(30, 1, kMidX, kMidY);
    rig.animal(30, 1, kMidX + 200, kMidY, true);
    rig.driver.run_cycle(30);
    rig.set_avalanche(45, Avalanche::A3);
    rig.gps(60, 1, kMidX + 31, kMidY + 10);
    rig.driver.run_cycle(60);
    rig.driver.run_cycle(90);
    rig.driver.finish(91);
  };

  RunJournal a, b;
  Rig ra(&a), rb(&b);
  script(ra);
  script(rb);
  CHECK(a.text() == b.text());
  CHECK_FALSE(a.text().empty());
  CHECK(a.text().find("V 1 t1") != std::string::npos);
  CHECK(a.text().find("A 45") != std::string::npos);
}
