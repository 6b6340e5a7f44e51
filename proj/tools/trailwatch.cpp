#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "trailwatch/analytics.hpp"
#include "trailwatch/preliminary.hpp"
#include "trailwatch/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsageError = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw trailwatch::ConfigError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::ordered_json summary_json(const trailwatch::RunResult& r, double speedup) {
  using trailwatch::solve_time_stats;
  nlohmann::ordered_json j;
  j["scenario"] = {{"id", r.scenario_id},
                   {"name", r.scenario_name}};
  j["seed"] = r.seed;
  j["speedup"] = speedup;
  j["cycles"] = r.cycles;
  j["assessments"] = r.assessments;
  j["assessed_tourists"] = r.assessed_tourists;
  j["events_per_tourist"] = r.events_per_tourist;
  j["severity_mean"] = r.severity_mean;

  nlohmann::ordered_json verdicts;
  const char* weather_names[5] = {"E1", "E2", "E3", "E4", "E5"};
  for (std::size_t i = 0; i < 5; ++i) verdicts[weather_names[i]] = r.weather_totals[i];
  const char* situational_names[4] = {"E6g", "E6a", "E6m", "E6r"};
  for (std::size_t i = 0; i < 4; ++i) verdicts[situational_names[i]] = r.situational_totals[i];
  j["verdicts"] = verdicts;

  j["population"] = {{"arrivals", r.sim_arrivals},
                     {"departures", r.sim_departures},
                     {"current", r.sim_population_final},
                     {"gps_refused", r.gps_refused}};

  if (r.transitions) {
    j["transitions"] = {{"departed", r.transitions->tourists},
                        {"avg", r.transitions->transitions.mean},
                        {"min", r.transitions->transitions.min},
                        {"max", r.transitions->transitions.max},
                        {"stddev", r.transitions->transitions.stddev}};
  } else {
    j["transitions"] = nullptr;
  }

  const trailwatch::SolveTimeStats st = solve_time_stats(r.reasoning);
  j["solver"] = {{"calls", r.reasoning.solver_calls},
                 {"starts", r.reasoning.solver_starts},
                 {"mean_ms", st.mean_ms},
                 {"stddev_ms", st.stddev_ms}};

  j["pipeline"] = {{"messages", r.pipeline.messages_seen},
                   {"dropped", r.pipeline.messages_dropped},
                   {"unlocatable", r.pipeline.unlocatable},
                   {"low_accuracy", r.pipeline.low_accuracy_events},
                   {"one_station", r.pipeline.one_station_events},
                   {"group_improvements", r.pipeline.group_improvements}};

  j["dumps"] = r.dumps.size();
  return j;
}

int cmd_run(int scenario_id, std::uint64_t seed, std::int64_t duration, double speedup,
            std::int64_t dump_every, const std::string& alerts,
            const std::string& area_path, const std::string& out_dir, bool svg) {
  trailwatch::RunManifest m;
  m.scenario = trailwatch::default_scenario(scenario_id);
  if (duration > 0) m.scenario.params.duration_s = duration;
  if (speedup > 0) m.scenario.params.speedup = speedup;
  m.seed = seed;
  m.dump_interval_s = dump_every;
  m.alert_set = alerts;
  if (!area_path.empty()) m.area = trailwatch::load_area(slurp(area_path));
  m.out_dir = out_dir;
  m.svg_frames = svg;

  const trailwatch::RunResult r = trailwatch::run_scenario(m);

  const nlohmann::ordered_json summary = summary_json(r, m.scenario.params.speedup);
  {
    std::ofstream out(std::filesystem::path(out_dir) / "summary.json",
                      std::ios::binary);
    if (!out) throw trailwatch::Error("cannot write summary.json under " + out_dir);
    out << summary.dump(2) << "\n";
  }

  std::cout << "scenario " << r.scenario_id << " (" << r.scenario_name << ") seed "
            << r.seed << ": " << r.cycles << " cycles, " << r.assessments
            << " assessments, " << r.sim_arrivals << " arrivals\n"
            << "artifacts in " << out_dir << "\n";
  return kOk;
}

int cmd_preliminary(std::uint64_t seed, double peak, int readings,
                    const std::string& out_dir) {
  trailwatch::PreliminaryParams p;
  p.seed = seed;
  if (peak >= 0) p.peak_tourists = peak;
  if (readings > 0) p.readings = readings;
  const trailwatch::PreliminaryReport rep = trailwatch::run_preliminary(p);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / "preliminary.csv",
                      std::ios::binary);
    if (!out) throw trailwatch::Error("cannot write preliminary.csv under " + out_dir);
    out << trailwatch::preliminary_csv(rep);
  }
  std::cout << trailwatch::preliminary_summary(rep);
  return kOk;
}

int cmd_lang_dump(const std::string& out_path) {
  const trailwatch::Dfa& dfa = trailwatch::threat_trace_acceptor();
  std::string text = "states " + std::to_string(dfa.num_states) + "\n";
  text += "initial " + std::to_string(dfa.initial) + "\n";
  text += "accepting";
  for (int s = 0; s < dfa.num_states; ++s)
    if (dfa.accepting[static_cast<std::size_t>(s)]) text += " " + std::to_string(s);
  text += "\n";
  for (int s = 0; s < dfa.num_states; ++s)
    for (int t = 0; t < trailwatch::kThreatTokenCount; ++t)
      text += std::to_string(s) + " " +
              trailwatch::token_label(static_cast<trailwatch::ThreatToken>(t)) + " " +
              std::to_string(dfa.next[static_cast<std::size_t>(s)]
                                     [static_cast<std::size_t>(t)]) +
              "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw trailwatch::Error("cannot write '" + out_path + "'");
    out << text;
  }
  return kOk;
}

int cmd_lang_check(const std::string& trace_path) {
  std::ifstream in(trace_path);
  if (!in) throw trailwatch::ConfigError("cannot read '" + trace_path + "'");
  const trailwatch::Dfa& dfa = trailwatch::threat_trace_acceptor();
  std::size_t total = 0, accepted = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Lines may carry a leading "<id>\t"; the token field is what follows
    // the last tab.
    const std::size_t tab = line.find_last_of('\t');
    const std::string tokens_text = tab == std::string::npos ? line : line.substr(tab + 1);
    if (tokens_text.empty()) continue;
    ++total;
    bool ok = false;
    try {
      ok = dfa.accepts(trailwatch::tokenize_threats(tokens_text));
    } catch (const trailwatch::VocabularyError& e) {
      std::cerr << trace_path << ":" << line_no << ": " << e.what() << "\n";
    }
    if (ok) {
      ++accepted;
    } else {
      std::cerr << trace_path << ":" << line_no << ": trace rejected\n";
    }
  }
  std::cout << accepted << "/" << total << " traces accepted\n";
  return accepted == total ? kOk : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mountain-rescue support engine and environment simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Simulate a scenario end to end");
  int scenario_id = 1;
  std::uint64_t seed = 2021;
  std::int64_t duration = 0;
  double speedup = 0;
  std::int64_t dump_every = 300;
  std::string alerts = "standard";
  std::string area_path;
  std::string out_dir = "tw-out";
  bool svg = false;
  run->add_option("--scenario", scenario_id, "Scenario number (1-5)")
      ->check(CLI::Range(1, 5));
  run->add_option("--seed", seed, "Run seed");
  run->add_option("--duration", duration, "Simulated seconds (default: scenario's)")
      ->check(CLI::PositiveNumber);
  run->add_option("--speedup", speedup, "Simulated/wall ratio recorded in reports")
      ->check(CLI::PositiveNumber);
  run->add_option("--dump-every", dump_every, "Dump interval, simulated seconds")
      ->check(CLI::PositiveNumber);
  run->add_option("--alerts", alerts, "Active alert set name");
  run->add_option("--area", area_path, "Area config file (default: built-in)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--svg", svg, "Render a map frame per dump");

  // preliminary
  auto* prelim = app.add_subcommand("preliminary",
                                    "Dry-run threat statistics over one day");
  std::uint64_t prelim_seed = 1;
  double prelim_peak = -1;
  int prelim_readings = 0;
  std::string prelim_out;
  prelim->add_option("--seed", prelim_seed, "Experiment seed");
  prelim->add_option("--peak", prelim_peak, "Attendance peak (tourists)");
  prelim->add_option("--readings", prelim_readings, "Number of half-hour readings");
  prelim->add_option("--out", prelim_out, "Directory for preliminary.csv");

  // lang
  auto* lang = app.add_subcommand("lang", "Threat-language tools");
  lang->require_subcommand(1);
  auto* dump_dfa = lang->add_subcommand("dump-dfa", "Print the trace acceptor");
  std::string dfa_out;
  dump_dfa->add_option("--out", dfa_out, "Write to file instead of stdout");
  auto* check = lang->add_subcommand("check", "Validate trace token files");
  std::string trace_path;
  check->add_option("file", trace_path, "Trace token file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*run)
      return cmd_run(scenario_id, seed, duration, speedup, dump_every, alerts,
                     area_path, out_dir, svg);
    if (*prelim)
      return cmd_preliminary(prelim_seed, prelim_peak, prelim_readings, prelim_out);
    if (*dump_dfa) return cmd_lang_dump(dfa_out);
    if (*check) return cmd_lang_check(trace_path);
  } catch (const trailwatch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const trailwatch::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const trailwatch::NotFoundError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const trailwatch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kUsageError;
}
