#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trailwatch/alerts.hpp"
#include "trailwatch/error.hpp"
#include "trailwatch/preprocess.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

/// Everything the reasoning layer needs to know about one tourist, refreshed
/// every time a fix is processed. One row per present tourist.
struct ContextRow {
  std::string tourist_id;
  GeoFix fix;
  std::string trail_id;
  Difficulty difficulty = Difficulty::D1;
  WeatherTags tags;
  std::string selected_station;
  DayNight day_night = DayNight::Day;
  Season season = Season::Summer;
  Avalanche avalanche = Avalanche::A1;  // level stamped when the row was written
  std::int64_t motion_idle_seconds = 0;
  bool off_trail = false;
  std::optional<double> group_leader_distance;
  std::optional<double> animal_distance;
  std::int64_t updated_at = 0;
};

/// The manually maintained avalanche danger scale.
struct AvalancheLevel {
  Avalanche level = Avalanche::A1;
  std::string set_by = "default";
  std::int64_t set_at = 0;
};

/// Point-in-time view handed to one reasoning cycle: rows in id order plus
/// the alert set and avalanche level the whole cycle must use.
struct RepositorySnapshot {
  std::vector<ContextRow> rows;
  std::shared_ptr<const AlertSet> alerts;
  std::string alert_set_name;
  AvalancheLevel avalanche;
};

/// The context hub between preprocessing and reasoning. Single logical
/// writer (the pipeline); snapshot readers may run concurrently. Alert-set
/// swaps and avalanche updates become visible at snapshot boundaries, never
/// inside a cycle.
class ContextRepository {
 public:
  void load_alert_sets(const std::string& text, const std::string& activate = "") {
    auto parsed = parse_alert_sets(text);
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& [name, set] : parsed)
      sets_[name] = std::make_shared<const AlertSet>(std::move(set));
    if (!activate.empty()) {
      if (!sets_.count(activate))
        throw NotFoundError("alert set '" + activate + "' not loaded");
      active_ = activate;
    } else if (active_.empty()) {
      active_ = sets_.begin()->first;  // first in name order
    }
  }

  /// Stores a row, returning the displaced one for transition counting.
  /// Rows for departed tourists and time regressions are stale writes.
  std::optional<ContextRow> upsert_row(ContextRow row) {
    std::lock_guard<std::mutex> lock(mu_);
    if (departed_.count(row.tourist_id))
      throw StaleWriteError("row for departed tourist " + row.tourist_id);
    auto it = rows_.find(row.tourist_id);
    std::optional<ContextRow> previous;
    if (it != rows_.end()) {
      if (row.updated_at < it->second.updated_at)
        throw StaleWriteError("row for " + row.tourist_id + " at " +
                              std::to_string(row.updated_at) + " is older than stored " +
                              std::to_string(it->second.updated_at));
      previous = it->second;
      it->second = std::move(row);
    } else {
      rows_.emplace(row.tourist_id, std::move(row));
    }
    return previous;
  }

  /// Removes the row and blocks all future writes for this tourist.
  std::optional<ContextRow> mark_departed(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    departed_.insert(id);
    auto it = rows_.find(id);
    if (it == rows_.end()) return std::nullopt;
    ContextRow row = std::move(it->second);
    rows_.erase(it);
    return row;
  }

  std::optional<ContextRow> row(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = rows_.find(id);
    if (it == rows_.end()) return std::nullopt;
    return it->second;
  }

  RepositorySnapshot snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    RepositorySnapshot snap;
    snap.rows.reserve(rows_.size());
    for (const auto& [id, row] : rows_) snap.rows.push_back(row);  // id order
    if (!active_.empty()) {
      snap.alerts = sets_.at(active_);
      snap.alert_set_name = active_;
    }
    snap.avalanche = avalanche_;
    return snap;
  }

  /// Atomically routes the next snapshot to another set; returns the name
  /// that was active before.
  std::string swap_alert_set(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!sets_.count(name)) throw NotFoundError("alert set '" + name + "' not loaded");
    std::string previous = active_;
    active_ = name;
    return previous;
  }

  void set_avalanche(AvalancheLevel level) {
    std::lock_guard<std::mutex> lock(mu_);
    avalanche_ = std::move(level);
  }

  AvalancheLevel avalanche() const {
    std::lock_guard<std::mutex> lock(mu_);
    return avalanche_;
  }

  std::size_t row_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return rows_.size();
  }

  std::string active_set_name() const {
    std::lock_guard<std::mutex> lock(mu_);
    return active_;
  }

  std::vector<std::string> alert_set_names() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> names;
    for (const auto& [name, set] : sets_) names.push_back(name);
    return names;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, ContextRow> rows_;
  std::set<std::string> departed_;
  std::map<std::string, std::shared_ptr<const AlertSet>> sets_;
  std::string active_;
  AvalancheLevel avalanche_;
};

}  // namespace trailwatch
