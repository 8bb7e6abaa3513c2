#include "tdost/home_metadata.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <utility>

#include <json.hpp>

#include "tdost/error.hpp"

namespace tdost {

namespace {

struct TypeNames {
    SensorType type;
    std::string_view name;
    std::string_view token;
};

constexpr std::array<TypeNames, 6> kTypes{{
    {SensorType::Motion, "motion", "motion"},
    {SensorType::Door, "door", "door"},
    {SensorType::Temperature, "temperature", "temperature"},
    {SensorType::Item, "item", "item"},
    {SensorType::LightSwitch, "light switch", "light_switch"},
    {SensorType::ActivateDevice, "activate device", "activate_device"},
}};

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw LayoutError(ctx + ": missing string field '" + key + "'");
    return it->get<std::string>();
}

}  // namespace

std::string_view sensor_type_name(SensorType t) {
    for (const auto& e : kTypes)
        if (e.type == t) return e.name;
    return "";
}

std::string_view sensor_type_token(SensorType t) {
    for (const auto& e : kTypes)
        if (e.type == t) return e.token;
    return "";
}

SensorType parse_sensor_type(std::string_view token) {
    for (const auto& e : kTypes)
        if (e.token == token) return e.type;
    throw LayoutError("unknown sensor type '" + std::string(token) + "'");
}

const SensorMeta* HomeLayout::find(std::string_view sensor_id) const {
    auto it = sensors.find(std::string(sensor_id));
    return it == sensors.end() ? nullptr : &it->second;
}

const SensorMeta& HomeLayout::lookup(std::string_view sensor_id) const {
    if (const auto* meta = find(sensor_id)) return *meta;
    throw UnresolvedSensorError(std::string(sensor_id));
}

std::optional<std::string> location_phrase_problem(std::string_view phrase) {
    if (phrase.empty()) return "empty location phrase";
    if (std::isspace(static_cast<unsigned char>(phrase.front())) ||
        std::isspace(static_cast<unsigned char>(phrase.back())))
        return "location phrase has surrounding whitespace";
    if (phrase.find("  ") != std::string_view::npos) return "location phrase has repeated spaces";
    if (std::isupper(static_cast<unsigned char>(phrase.front()))) return "location phrase starts with a capital";
    for (std::string_view article : {"a ", "an "})
        if (phrase.substr(0, article.size()) == article) return "location phrase starts with an article";
    return std::nullopt;
}

HomeLayout load_layout(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw LayoutError(std::string("layout is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw LayoutError("layout: top level must be an object");

    HomeLayout layout;
    layout.home_id = require_string(doc, "home_id", "layout");
    layout.description = doc.value("description", std::string{});
    layout.experimental = doc.value("experimental", false);
    auto residents = doc.find("residents");
    if (residents == doc.end() || !residents->is_number_integer() || residents->get<int>() < 1)
        throw LayoutError("layout: 'residents' must be a positive integer");
    layout.residents = residents->get<int>();

    auto sensors = doc.find("sensors");
    if (sensors == doc.end() || !sensors->is_array()) throw LayoutError("layout: 'sensors' must be an array");
    for (const auto& s : *sensors) {
        if (!s.is_object()) throw LayoutError("layout: sensor entries must be objects");
        SensorMeta meta;
        meta.sensor_id = require_string(s, "id", "sensor");
        const std::string ctx = "sensor " + meta.sensor_id;
        if (meta.sensor_id.empty() ||
            meta.sensor_id.find_first_of(" \t\r\n") != std::string::npos)
            throw LayoutError(ctx + ": id must be a non-empty token");
        meta.sensor_type = parse_sensor_type(require_string(s, "type", ctx));
        meta.location_basic = require_string(s, "location_basic", ctx);
        meta.location_granular = require_string(s, "location_granular", ctx);
        for (const auto* phrase : {&meta.location_basic, &meta.location_granular})
            if (auto problem = location_phrase_problem(*phrase)) throw LayoutError(ctx + ": " + *problem);
        if (meta.location_granular.find(meta.location_basic) == std::string::npos)
            throw LayoutError(ctx + ": location_granular must extend location_basic");
        if (!layout.sensors.emplace(meta.sensor_id, meta).second)
            throw LayoutError("duplicate sensor id '" + meta.sensor_id + "'");
    }
    return layout;
}

HomeLayout load_layout_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LayoutError("cannot open layout file '" + path + "'");
    return load_layout(in);
}

std::string serialize_layout(const HomeLayout& layout) {
    nlohmann::ordered_json doc;
    doc["home_id"] = layout.home_id;
    doc["residents"] = layout.residents;
    doc["description"] = layout.description;
    if (layout.experimental) doc["experimental"] = true;
    auto& sensors = doc["sensors"] = nlohmann::ordered_json::array();
    for (const auto& [id, meta] : layout.sensors) {
        sensors.push_back({{"id", id},
                           {"type", sensor_type_token(meta.sensor_type)},
                           {"location_basic", meta.location_basic},
                           {"location_granular", meta.location_granular}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace tdost
