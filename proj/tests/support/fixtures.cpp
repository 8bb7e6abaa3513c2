#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "support/chat_stub.hpp"
#include "tdost/rng.hpp"

namespace support {

std::string data_path(const std::string& relative) { return std::string(TDOST_DATA_DIR) + "/" + relative; }
std::string support_path(const std::string& relative) { return std::string(TDOST_TEST_SUPPORT_DIR) + "/" + relative; }

tdost::HomeLayout shipped_layout(const std::string& home) {
    return tdost::load_layout_file(data_path("layouts/" + home + ".json"));
}

tdost::ActivityMap shipped_map(const std::string& home) {
    return tdost::load_activity_map_file(data_path("activity_maps/" + home + ".json"));
}

tdost::synthetic::HomeTemplate shipped_template(const std::string& name) {
    return tdost::synthetic::load_template_file(data_path("templates/" + name + ".json"));
}

std::pair<tdost::synthetic::HomeBundle, tdost::synthetic::HomeBundle> synthetic_pair(std::uint64_t seed, int days) {
    return tdost::synthetic::paired_homes(shipped_template("home_a"), shipped_template("home_b"), seed, days);
}

tdost::SensorEvent event(const std::string& date, const std::string& time, const std::string& sensor,
                         const std::string& value, std::optional<tdost::Annotation> annotation) {
    tdost::SensorEvent ev;
    ev.timestamp = tdost::parse_timestamp(date, time);
    ev.sensor_id = sensor;
    ev.value = tdost::SensorValue::classify(value);
    ev.annotation = std::move(annotation);
    return ev;
}

tdost::Annotation begin(const std::string& activity) { return {activity, tdost::Marker::Begin}; }
tdost::Annotation end(const std::string& activity) { return {activity, tdost::Marker::End}; }

tdost::AugmentationCache scripted_cache(const tdost::EventLog& log, const tdost::HomeLayout& layout) {
    tdost::AugmentationCache cache;
    ScriptedChatClient client;
    tdost::AugmentOptions options;
    options.mode = tdost::AugmentMode::Live;
    options.retrieved_date = "2024-01-01";
    tdost::augment(tdost::collect_trigger_keys(log, layout), cache, &client, options);
    return cache;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("tdost-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace support
