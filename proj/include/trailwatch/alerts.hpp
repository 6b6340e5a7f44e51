#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trailwatch/error.hpp"
#include "trailwatch/logic.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

/// One trigger rule: fires alert `level` when the rule matches the row's
/// static context and the row entails `formula`. Wildcards (unset optionals)
/// match anything; the most specific matching rule wins.
struct AlertRule {
  WeatherThreat level = WeatherThreat::E2;
  std::optional<Difficulty> difficulty;
  std::optional<DayNight> day_night;
  std::optional<Season> season;
  Formula formula = Formula::parse("W1");
  std::string formula_text;

  int specificity() const {
    return (difficulty ? 4 : 0) + (day_night ? 2 : 0) + (season ? 1 : 0);
  }

  bool matches(WeatherThreat l, Difficulty d, DayNight dn, Season s) const {
    return level == l && (!difficulty || *difficulty == d) &&
           (!day_night || *day_night == dn) && (!season || *season == s);
  }
};

/// Named set of trigger rules; complete over every (level, difficulty,
/// day/night, season) combination by construction (validated at load).
struct AlertSet {
  std::string name;
  std::vector<AlertRule> rules;

  /// Most specific matching rule. Distinct rules of equal specificity can
  /// never match the same query (duplicates are rejected at load), so the
  /// winner is unique.
  const AlertRule* match(WeatherThreat level, Difficulty d, DayNight dn, Season s) const {
    const AlertRule* best = nullptr;
    for (const AlertRule& r : rules) {
      if (!r.matches(level, d, dn, s)) continue;
      if (!best || r.specificity() > best->specificity()) best = &r;
    }
    return best;
  }
};

namespace alerts_detail {

inline WeatherThreat parse_alert_level(const std::string& w, int line) {
  if (w == "E2") return WeatherThreat::E2;
  if (w == "E3") return WeatherThreat::E3;
  if (w == "E4") return WeatherThreat::E4;
  if (w == "E5") return WeatherThreat::E5;
  throw ConfigError("alert set line " + std::to_string(line) + ": level must be E2..E5, got '" +
                    w + "'");
}

}  // namespace alerts_detail

/// Parses one or more `[set NAME]` blocks of rule lines:
///   LEVEL DIFFICULTY DAY/NIGHT SEASON = FORMULA
/// with '*' as wildcard in the three context columns. '#' starts a comment.
/// Every set must resolve a rule for all 64 context combinations.
inline std::map<std::string, AlertSet> parse_alert_sets(const std::string& text) {
  std::map<std::string, AlertSet> sets;
  AlertSet* current = nullptr;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
    line.erase(0, start);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("alert set line " + std::to_string(line_no) + ": unterminated header");
      std::istringstream hdr(line.substr(1, line.size() - 2));
      std::string kw, name, extra;
      hdr >> kw >> name;
      if (kw != "set" || name.empty() || (hdr >> extra))
        throw ConfigError("alert set line " + std::to_string(line_no) +
                          ": header must be [set NAME]");
      if (sets.count(name))
        throw ConfigError("alert set line " + std::to_string(line_no) + ": duplicate set '" +
                          name + "'");
      current = &sets[name];
      current->name = name;
      continue;
    }

    if (!current)
      throw ConfigError("alert set line " + std::to_string(line_no) +
                        ": rule before any [set NAME] header");

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("alert set line " + std::to_string(line_no) + ": missing '='");
    std::istringstream head(line.substr(0, eq));
    std::string level_w, diff_w, dn_w, season_w, extra;
    if (!(head >> level_w >> diff_w >> dn_w >> season_w) || (head >> extra))
      throw ConfigError("alert set line " + std::to_string(line_no) +
                        ": rule head must be LEVEL DIFFICULTY DAY/NIGHT SEASON");

    AlertRule rule;
    rule.level = alerts_detail::parse_alert_level(level_w, line_no);
    try {
      if (diff_w != "*") rule.difficulty = parse_difficulty(diff_w);
      if (dn_w != "*") rule.day_night = parse_day_night(dn_w);
      if (season_w != "*") rule.season = parse_season(season_w);
    } catch (const VocabularyError& e) {
      throw ConfigError("alert set line " + std::to_string(line_no) + ": " + e.what());
    }
    rule.formula_text = line.substr(eq + 1);
    {
      std::size_t s = 0;
      while (s < rule.formula_text.size() && rule.formula_text[s] == ' ') ++s;
      rule.formula_text.erase(0, s);
    }
    try {
      rule.formula = Formula::parse(rule.formula_text);
    } catch (const VocabularyError& e) {
      throw ConfigError("alert set line " + std::to_string(line_no) + ": " + e.what());
    }

    for (const AlertRule& existing : current->rules)
      if (existing.level == rule.level && existing.difficulty == rule.difficulty &&
          existing.day_night == rule.day_night && existing.season == rule.season)
        throw ConfigError("alert set line " + std::to_string(line_no) +
                          ": duplicate rule key in set '" + current->name + "'");
    current->rules.push_back(std::move(rule));
  }

  if (sets.empty()) throw ConfigError("alert set file defines no [set NAME] block");

  std::vector<std::string> failures;
  for (const auto& [name, set] : sets) {
    for (WeatherThreat level : {WeatherThreat::E2, WeatherThreat::E3, WeatherThreat::E4,
                                WeatherThreat::E5}) {
      for (int d = 1; d <= 4; ++d) {
        for (DayNight dn : {DayNight::Day, DayNight::Night}) {
          for (Season s : {Season::Summer, Season::Winter}) {
            if (!set.match(level, static_cast<Difficulty>(d), dn, s))
              failures.push_back("set '" + name + "': no rule covers " +
                                 to_string(level) + " " + to_string(static_cast<Difficulty>(d)) +
                                 " " + to_string(dn) + " " + to_string(s));
          }
        }
      }
    }
  }
  if (!failures.empty()) throw ValidationError(std::move(failures));
  return sets;
}

}  // namespace trailwatch
