#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "trailwatch/geo.hpp"
#include "trailwatch/tags.hpp"

namespace trailwatch {

enum class Topic : std::uint8_t {
  Weather,
  BtsMeasurement,
  GpsTourist,
  GpsAnimal,
  Control,
};

constexpr int kTopicCount = 5;

inline const char* to_string(Topic t) {
  switch (t) {
    case Topic::Weather: return "Weather";
    case Topic::BtsMeasurement: return "BtsMeasurement";
    case Topic::GpsTourist: return "GpsTourist";
    case Topic::GpsAnimal: return "GpsAnimal";
    default: return "Control";
  }
}

/// Raw station reading before tagging.
struct WeatherReadingMsg {
  std::string station_id;
  double wind_mps = 0.0;
  double visibility_m = 0.0;
  double temperature_c = 0.0;
  double rain_mmh = 0.0;
};

/// Signal strength of one phone as heard by one BTS station.
struct BtsSignalMsg {
  std::string station_id;
  int phone_id = 0;  // tourist id
  double rssi_dbm = 0.0;
};

struct GpsTouristMsg {
  int tourist_id = 0;
  GeoPoint point;
};

struct GpsAnimalMsg {
  int animal_id = 0;
  GeoPoint point;
  bool dangerous = true;
};

/// Operator actions: manual avalanche level and alert-set swaps.
struct ControlMsg {
  enum class Kind : std::uint8_t { SetAvalanche, SwapAlertSet } kind = Kind::SetAvalanche;
  Avalanche avalanche = Avalanche::A1;
  std::string alert_set_name;
  std::string operator_id = "simulator";
};

using MessagePayload =
    std::variant<WeatherReadingMsg, BtsSignalMsg, GpsTouristMsg, GpsAnimalMsg, ControlMsg>;

struct Message {
  Topic topic = Topic::Weather;
  std::int64_t timestamp = 0;      // simulated seconds
  std::uint64_t sequence = 0;      // per-topic, stamped by the broker
  MessagePayload payload;
};

inline Topic topic_of(const MessagePayload& p) {
  switch (p.index()) {
    case 0: return Topic::Weather;
    case 1: return Topic::BtsMeasurement;
    case 2: return Topic::GpsTourist;
    case 3: return Topic::GpsAnimal;
    default: return Topic::Control;
  }
}

}  // namespace trailwatch
