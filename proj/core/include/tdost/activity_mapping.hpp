#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdost {

/// The shared label space. Enumerator order is the canonical classifier index order.
enum class CommonActivity {
    Relax,
    Cook,
    LeaveHome,
    EnterHome,
    Sleep,
    Eat,
    Work,
    BedToToilet,
    Bathing,
    TakeMedicine,
    PersonalHygiene,
    Other,
};

inline constexpr std::size_t kCommonActivityCount = 12;

const std::array<CommonActivity, kCommonActivityCount>& all_common_activities();
std::string_view activity_name(CommonActivity a);
std::optional<CommonActivity> parse_common_activity(std::string_view name);
inline std::size_t canonical_index(CommonActivity a) { return static_cast<std::size_t>(a); }

class ActivityMap {
public:
    ActivityMap() = default;
    ActivityMap(std::string home_id, std::vector<std::pair<std::string, CommonActivity>> entries);

    const std::string& home_id() const { return home_id_; }
    /// Entries in file order.
    const std::vector<std::pair<std::string, CommonActivity>>& entries() const { return entries_; }

    /// Exact match after trimming; CASAS-style underscores ("Meal_Preparation") fall back to
    /// their spaced form. Throws UnmappedLabelError.
    CommonActivity translate(std::string_view raw) const;
    std::optional<CommonActivity> try_translate(std::string_view raw) const;

    /// Distinct mapped labels, canonical order.
    std::vector<CommonActivity> image() const;

private:
    std::string home_id_;
    std::vector<std::pair<std::string, CommonActivity>> entries_;
};

/// Intersection of both images in canonical order. Throws ConfigError when empty.
std::vector<CommonActivity> common_label_set(const ActivityMap& source, const ActivityMap& target);

/// {"home_id": str, "entries": [{"raw": str, "common": str}, ...]}. Throws DataError.
ActivityMap load_activity_map(std::istream& in);
ActivityMap load_activity_map_file(const std::string& path);
std::string serialize_activity_map(const ActivityMap& map);

}  // namespace tdost
