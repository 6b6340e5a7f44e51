#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "trailwatch/error.hpp"
#include "trailwatch/reasoning.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

/// Append-only run record. Every line is typed by its first character:
///   R run header          M per-cycle message stats   V verdict
///   E pipeline event      A avalanche change           S alert-set swap
///   D dump marker         X run footer
/// Content is derived exclusively from simulated time and seeded state, never
/// from wall clocks, so identical runs serialize byte for byte.
class RunJournal {
 public:
  void header(const std::string& scenario_name, std::uint64_t seed, std::int64_t duration) {
    line("R scenario=" + scenario_name + " seed=" + std::to_string(seed) +
         " duration=" + std::to_string(duration));
  }

  void message_stats(std::uint64_t cycle, std::int64_t now, std::size_t weather,
                     std::size_t bts, std::size_t gps, std::size_t animal,
                     std::size_t control, std::size_t dropped) {
    line("M " + std::to_string(cycle) + " t=" + std::to_string(now) +
         " weather=" + std::to_string(weather) + " bts=" + std::to_string(bts) +
         " gps=" + std::to_string(gps) + " animal=" + std::to_string(animal) +
         " control=" + std::to_string(control) + " dropped=" + std::to_string(dropped));
  }

  void event(std::int64_t t, const std::string& kind, const std::string& entity,
             const std::string& detail) {
    std::string l = "E " + std::to_string(t) + " " + kind + " " + entity;
    if (!detail.empty()) l += " " + detail;
    line(l);
  }

  void verdict(const ThreatVerdict& v, double lat, double lon, const std::string& trail,
               Difficulty difficulty) {
    char pos[64];
    std::snprintf(pos, sizeof(pos), "%.6f %.6f", lat, lon);
    std::string sits = situational_labels(v.situational);
    line("V " + std::to_string(v.cycle) + " " + v.tourist_id + " " +
         to_string(v.weather) + " " + (sits.empty() ? "-" : sits) + " " + pos + " " +
         trail + " " + to_string(difficulty));
  }

  void avalanche(std::int64_t t, Avalanche level, const std::string& by) {
    line("A " + std::to_string(t) + " " + to_string(level) + " " + by);
  }

  void swap(std::int64_t t, const std::string& from, const std::string& to) {
    line("S " + std::to_string(t) + " " + from + " -> " + to);
  }

  void dump_marker(std::int64_t t, const std::string& summary) {
    line("D " + std::to_string(t) + " " + summary);
  }

  void footer(std::uint64_t cycles, std::uint64_t verdicts) {
    line("X cycles=" + std::to_string(cycles) + " verdicts=" + std::to_string(verdicts));
  }

  void line(const std::string& l) {
    text_ += l;
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write journal to " + path);
    out << text_;
  }

 private:
  std::string text_;
};

}  // namespace trailwatch
