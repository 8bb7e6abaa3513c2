#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tdost/activity_mapping.hpp"
#include "tdost/event_log.hpp"
#include "tdost/home_metadata.hpp"

namespace tdost::synthetic {

struct Range {
    double mean = 0;
    double sd = 0;
    double min = 0;
    double max = 0;
};

struct Room {
    std::string key;     // semantic room kind shared across templates ("bedroom", "kitchen", ...)
    std::string phrase;  // this home's wording ("first bedroom", "master bedroom")
    std::vector<std::string> landmarks;  // "near window"
    std::map<SensorType, int> sensors;   // count per type
    double base_temperature = 21.0;
};

struct IdScheme {
    std::map<SensorType, std::string> prefixes;  // missing types use "X"
    int start = 1;
    int width = 3;
    bool shared_counter = false;  // one running number across all types
};

/// First-order room walk: stay with probability `stay`, otherwise move to another room drawn by
/// weight. Each visit fires a truncated-normal number of motion ON/OFF pairs.
struct ActivityScript {
    std::string raw_label;
    CommonActivity common = CommonActivity::Other;
    std::vector<Range> start_hours;  // one entry per daily episode
    std::string start_room;
    std::map<std::string, double> room_weights;
    double stay = 0.5;
    Range visits;
    Range firings_per_visit;
    Range gap_seconds;
    double door_prob = 0.0;
    double temperature_prob = 0.0;
    double temperature_shift = 0.0;  // added to the room's base temperature
};

struct HomeTemplate {
    std::string home_id;
    std::string description;
    int residents = 1;
    IdScheme ids;
    std::vector<Room> rooms;
    std::vector<ActivityScript> activities;

    /// Throws ConfigError: unknown rooms in scripts, fewer than 4 activities, rooms without motion
    /// sensors referenced by scripts.
    void validate() const;
};

HomeTemplate load_template(std::istream& in);
HomeTemplate load_template_file(const std::string& path);

struct GenerationRecipe {
    std::uint64_t seed = 1;
    int days = 7;
    int residents = 1;
    double noise_rate = 0.0;  // spurious unannotated triggers per hour between episodes
    std::string start_date = "2011-06-06";
};

struct HomeBundle {
    EventLog log;  // annotated
    HomeLayout layout;
    ActivityMap map;
};

/// Sensor registry implied by the template (ids, locations).
HomeLayout layout_for(const HomeTemplate& tmpl);
ActivityMap activity_map_for(const HomeTemplate& tmpl);

/// Deterministic in (template, recipe).
HomeBundle generate(const HomeTemplate& tmpl, const GenerationRecipe& recipe);

/// Two homes generated from their templates with seeds derived from `seed`. Throws ConfigError
/// unless the sensor-id namespaces are disjoint and the activity images share at least six labels.
std::pair<HomeBundle, HomeBundle> paired_homes(const HomeTemplate& a, const HomeTemplate& b, std::uint64_t seed,
                                               int days = 7, double noise_rate = 0.0);

}  // namespace tdost::synthetic
