#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "tdost/activity_mapping.hpp"
#include "tdost/event_log.hpp"
#include "tdost/home_metadata.hpp"
#include "tdost/llm_augmenter.hpp"
#include "tdost/synthetic_home.hpp"

namespace support {

std::string data_path(const std::string& relative);
std::string support_path(const std::string& relative);

tdost::HomeLayout shipped_layout(const std::string& home);
tdost::ActivityMap shipped_map(const std::string& home);
tdost::synthetic::HomeTemplate shipped_template(const std::string& name);

/// The shipped home_a/home_b pair.
std::pair<tdost::synthetic::HomeBundle, tdost::synthetic::HomeBundle> synthetic_pair(std::uint64_t seed, int days = 7);

tdost::SensorEvent event(const std::string& date, const std::string& time, const std::string& sensor,
                         const std::string& value, std::optional<tdost::Annotation> annotation = std::nullopt);
tdost::Annotation begin(const std::string& activity);
tdost::Annotation end(const std::string& activity);

/// Cache covering every trigger of the log, filled by the scripted chat client.
tdost::AugmentationCache scripted_cache(const tdost::EventLog& log, const tdost::HomeLayout& layout);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace support
