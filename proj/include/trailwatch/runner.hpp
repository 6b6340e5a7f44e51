#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trailwatch/analytics.hpp"
#include "trailwatch/behavior.hpp"
#include "trailwatch/defaults.hpp"
#include "trailwatch/journal.hpp"
#include "trailwatch/pipeline.hpp"
#include "trailwatch/simulator.hpp"

namespace trailwatch {

/// One complete run: what to simulate, how to assess it, where the
/// artifacts go. `out_dir` empty means in-memory only.
struct RunManifest {
  ScenarioSpec scenario;
  std::uint64_t seed = 2021;
  std::optional<AreaConfig> area;     // default demo massif when absent
  std::string alert_sets_text;        // default shipped sets when empty
  std::string alert_set = "standard";
  std::int64_t cycle_interval_s = 30;
  std::int64_t dump_interval_s = 300;
  std::size_t sharing_sample_pairs = 2000;
  std::string out_dir;
  bool svg_frames = false;
};

struct RunResult {
  int scenario_id = 0;
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::uint64_t cycles = 0;
  std::uint64_t verdicts_total = 0;

  std::string journal_text;
  std::vector<Dump> dumps;

  std::array<std::uint64_t, 5> weather_totals{};
  std::array<std::uint64_t, 4> situational_totals{};
  std::map<std::string, std::array<std::uint64_t, 5>> weather_by_trail;
  std::array<std::uint64_t, 4> proximity{};
  std::optional<TransitionStats> transitions;
  double events_per_tourist = 0.0;
  double severity_mean = 0.0;
  std::uint64_t assessments = 0;
  std::uint64_t assessed_tourists = 0;

  PipelineCounters pipeline;
  ReasoningCounters reasoning;

  std::int64_t sim_arrivals = 0;
  std::int64_t sim_departures = 0;
  std::int64_t sim_population_final = 0;
  std::uint64_t gps_refused = 0;

  std::map<std::string, std::vector<CycleAssessment>> traces;
  std::vector<SimEvent> sim_events;
};

namespace runner_detail {

inline std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "map_%04d.svg", index);
  return buf;
}

inline std::string dump_summary(const Dump& d) {
  std::string s = "pop=" + std::to_string(d.current) + "/" + std::to_string(d.total) +
                  " gps=" + std::to_string(d.located_gps) +
                  " bts=" + std::to_string(d.located_bts) + " alerts=";
  for (std::size_t i = 0; i < d.weather_cum.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(d.weather_cum[i]);
  }
  return s;
}

}  // namespace runner_detail

/// Drives a full scenario end to end: environment generation, message
/// transport, assessment cycles, periodic dumps, and artifact files. Fully
/// deterministic for a given manifest.
inline RunResult run_scenario(const RunManifest& m) {
  const AreaConfig& area = m.area ? *m.area : default_area();
  const std::int64_t cycle_every = m.cycle_interval_s;
  const std::int64_t dump_every = m.dump_interval_s;
  if (cycle_every <= 0 || dump_every <= 0)
    throw ConfigError("cycle and dump intervals must be positive");

  Simulator sim(area, m.scenario, m.seed);
  Broker broker;
  ContextRepository repo;
  repo.load_alert_sets(m.alert_sets_text.empty() ? default_alert_sets_text()
                                                 : m.alert_sets_text,
                       m.alert_set);
  RunJournal journal;
  CycleDriver driver(area, repo, broker, &journal, m.scenario.season);
  RunStats stats(area, m.sharing_sample_pairs, m.seed);

  journal.header(m.scenario.name, m.seed, m.scenario.params.duration_s);
  repo.set_avalanche({m.scenario.initial_avalanche, "scenario", 0});
  journal.avalanche(0, m.scenario.initial_avalanche, "scenario");

  const bool artifacts = !m.out_dir.empty();
  std::filesystem::path out;
  if (artifacts) {
    out = m.out_dir;
    std::filesystem::create_directories(out);
  }

  std::map<int, std::size_t> registered_groups;  // group id -> members seen
  auto sync_groups = [&] {
    for (const auto& [gid, group] : sim.groups()) {
      auto it = registered_groups.find(gid);
      if (it != registered_groups.end() && it->second == group.member_ids.size()) continue;
      driver.register_group(gid, group.leader_id, group.member_ids);
      registered_groups[gid] = group.member_ids.size();
    }
  };

  std::set<int> refused_gps;
  auto track_refusals = [&] {
    for (const auto& [id, t] : sim.tourists())
      if (t.phone_mode == PhoneMode::GpsRefused) refused_gps.insert(id);
  };

  RunResult result;
  CycleReport last_report;

  auto dump_at = [&](std::int64_t t) {
    const Dump d = stats.take_dump(driver, t, refused_gps.size());
    journal.dump_marker(t, runner_detail::dump_summary(d));
    if (artifacts && m.svg_frames)
      analytics_detail::write_text_file(
          (out / runner_detail::frame_name(d.index)).string(),
          render_map_svg(area, last_report.snapshot, last_report.verdicts));
  };

  while (!sim.done()) {
    const std::int64_t t = sim.now();  // messages this tick carry this stamp
    for (Message& msg : sim.step()) broker.publish(std::move(msg));
    sync_groups();
    track_refusals();
    if (t % cycle_every == 0) {
      last_report = driver.run_cycle(t);
      stats.observe_cycle(last_report);
      result.verdicts_total += last_report.verdicts.size();
    }
    if (t > 0 && t % dump_every == 0) dump_at(t);
  }

  const std::int64_t end = sim.now();
  stats.observe_departures(driver.finish(end));
  dump_at(end);
  journal.footer(driver.cycles_run(), result.verdicts_total);

  result.scenario_id = m.scenario.id;
  result.scenario_name = m.scenario.name;
  result.seed = m.seed;
  result.cycles = driver.cycles_run();
  result.journal_text = journal.text();
  result.dumps = stats.dumps();
  result.weather_totals = stats.weather_totals();
  result.situational_totals = stats.situational_totals();
  result.weather_by_trail = stats.weather_by_trail();
  result.proximity = stats.proximity_buckets();
  result.transitions = stats.transition_stats();
  result.events_per_tourist = stats.events_per_tourist();
  result.severity_mean = stats.severity_mean();
  result.assessments = stats.assessments();
  result.assessed_tourists = stats.assessed_tourists();
  result.pipeline = driver.counters();
  result.reasoning = driver.reasoning_counters();
  result.sim_arrivals = sim.arrivals_total();
  result.sim_departures = sim.departures_total();
  result.sim_population_final = sim.population();
  result.gps_refused = refused_gps.size();
  result.traces = driver.traces();
  result.sim_events = sim.events();

  if (artifacts) {
    journal.write_file((out / "journal.txt").string());
    write_dumps_csv((out / "dumps.csv").string(), result.dumps);
    write_threats_csv((out / "threats.csv").string(), result.weather_by_trail);
    write_transitions_csv((out / "transitions.csv").string(), result.transitions);
    write_sharing_csv((out / "sharing.csv").string(),
                      result.dumps.empty() ? SharingHistogram{}
                                           : result.dumps.back().sharing);
    write_proximity_csv((out / "proximity.csv").string(), result.proximity,
                        result.events_per_tourist);

    std::string behavior, tokens;
    for (const auto& [id, assessments] : result.traces) {
      const std::vector<BehaviorPoint> trace = build_behavior_trace(id, assessments);
      for (const BehaviorPoint& p : trace) {
        behavior += behavior_point_line(p);
        behavior += '\n';
      }
      tokens += id + "\t" + token_string(trace_tokens(trace)) + "\n";
    }
    analytics_detail::write_text_file((out / "behavior.txt").string(), behavior);
    analytics_detail::write_text_file((out / "tokens.txt").string(), tokens);

    std::string events;
    for (const SimEvent& e : result.sim_events)
      events += std::to_string(e.t) + "\t" + e.kind + "\t" + e.entity + "\t" + e.detail + "\n";
    analytics_detail::write_text_file((out / "events.txt").string(), events);
  }

  return result;
}

}  // namespace trailwatch
