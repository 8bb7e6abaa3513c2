#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tdost {

enum class SensorType { Motion, Door, Temperature, Item, LightSwitch, ActivateDevice };

/// Word(s) used in sentences: "motion", ..., "light switch", "activate device".
std::string_view sensor_type_name(SensorType t);
/// File token: "motion", ..., "light_switch", "activate_device".
std::string_view sensor_type_token(SensorType t);
/// Throws LayoutError("unknown sensor type ...").
SensorType parse_sensor_type(std::string_view token);

struct SensorMeta {
    std::string sensor_id;
    SensorType sensor_type = SensorType::Motion;
    std::string location_basic;     // room-level phrase, e.g. "first bedroom"
    std::string location_granular;  // with landmark, e.g. "kitchen near stove"

    friend bool operator==(const SensorMeta&, const SensorMeta&) = default;
};

struct HomeLayout {
    std::string home_id;
    int residents = 1;
    std::string description;
    bool experimental = false;
    std::map<std::string, SensorMeta> sensors;

    /// Throws UnresolvedSensorError.
    const SensorMeta& lookup(std::string_view sensor_id) const;
    const SensorMeta* find(std::string_view sensor_id) const;

    friend bool operator==(const HomeLayout&, const HomeLayout&) = default;
};

/// Checks a location phrase: non-empty, trimmed, single-spaced, not capitalised, no leading article.
/// Returns a reason when the phrase is rejected.
std::optional<std::string> location_phrase_problem(std::string_view phrase);

/// Parses and validates the layout JSON. Throws LayoutError.
HomeLayout load_layout(std::istream& in);
HomeLayout load_layout_file(const std::string& path);

/// Writes the layout JSON; load_layout(serialize_layout(x)) == x.
std::string serialize_layout(const HomeLayout& layout);

}  // namespace tdost
