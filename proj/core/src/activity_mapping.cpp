#include "tdost/activity_mapping.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "tdost/error.hpp"

namespace tdost {

namespace {

constexpr std::array<std::string_view, kCommonActivityCount> kNames{
    "Relax", "Cook",    "Leave Home", "Enter Home",    "Sleep",            "Eat",
    "Work",  "Bed to Toilet", "Bathing", "Take Medicine", "Personal Hygiene", "Other"};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

const std::array<CommonActivity, kCommonActivityCount>& all_common_activities() {
    static const std::array<CommonActivity, kCommonActivityCount> all = [] {
        std::array<CommonActivity, kCommonActivityCount> a{};
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<CommonActivity>(i);
        return a;
    }();
    return all;
}

std::string_view activity_name(CommonActivity a) { return kNames[canonical_index(a)]; }

std::optional<CommonActivity> parse_common_activity(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return static_cast<CommonActivity>(i);
    return std::nullopt;
}

ActivityMap::ActivityMap(std::string home_id, std::vector<std::pair<std::string, CommonActivity>> entries)
    : home_id_(std::move(home_id)), entries_(std::move(entries)) {
    for (auto& [raw, _] : entries_) raw = std::string(trim(raw));
}

std::optional<CommonActivity> ActivityMap::try_translate(std::string_view raw) const {
    const auto key = trim(raw);
    for (const auto& [label, common] : entries_)
        if (label == key) return common;
    if (key.find('_') != std::string_view::npos) {
        std::string spaced(key);
        std::replace(spaced.begin(), spaced.end(), '_', ' ');
        for (const auto& [label, common] : entries_)
            if (label == spaced) return common;
    }
    return std::nullopt;
}

CommonActivity ActivityMap::translate(std::string_view raw) const {
    if (auto c = try_translate(raw)) return *c;
    throw UnmappedLabelError(std::string(trim(raw)));
}

std::vector<CommonActivity> ActivityMap::image() const {
    std::array<bool, kCommonActivityCount> present{};
    for (const auto& e : entries_) present[canonical_index(e.second)] = true;
    std::vector<CommonActivity> out;
    for (auto a : all_common_activities())
        if (present[canonical_index(a)]) out.push_back(a);
    return out;
}

std::vector<CommonActivity> common_label_set(const ActivityMap& source, const ActivityMap& target) {
    const auto a = source.image();
    const auto b = target.image();
    std::vector<CommonActivity> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    if (out.empty())
        throw ConfigError("no common activities between '" + source.home_id() + "' and '" + target.home_id() + "'");
    return out;
}

ActivityMap load_activity_map(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("activity map is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("home_id") || !doc["home_id"].is_string() || !doc.contains("entries") ||
        !doc["entries"].is_array())
        throw DataError("activity map: expected {\"home_id\": str, \"entries\": [...]}");

    std::vector<std::pair<std::string, CommonActivity>> entries;
    for (const auto& e : doc["entries"]) {
        if (!e.is_object() || !e.contains("raw") || !e.contains("common") || !e["raw"].is_string() ||
            !e["common"].is_string())
            throw DataError("activity map: entries need string 'raw' and 'common'");
        const auto raw = std::string(trim(e["raw"].get<std::string>()));
        const auto common = parse_common_activity(e["common"].get<std::string>());
        if (!common) throw DataError("activity map: '" + e["common"].get<std::string>() + "' is not a common activity");
        if (std::any_of(entries.begin(), entries.end(), [&](const auto& p) { return p.first == raw; }))
            throw DataError("activity map: duplicate raw label '" + raw + "'");
        entries.emplace_back(raw, *common);
    }
    return ActivityMap(doc["home_id"].get<std::string>(), std::move(entries));
}

ActivityMap load_activity_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open activity map '" + path + "'");
    return load_activity_map(in);
}

std::string serialize_activity_map(const ActivityMap& map) {
    nlohmann::ordered_json doc;
    doc["home_id"] = map.home_id();
    auto& entries = doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& [raw, common] : map.entries()) entries.push_back({{"raw", raw}, {"common", activity_name(common)}});
    return doc.dump(2) + "\n";
}

}  // namespace tdost
