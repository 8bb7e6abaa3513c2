#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdost/event_log.hpp"
#include "tdost/home_metadata.hpp"
#include "tdost/llm_augmenter.hpp"

namespace tdost {

enum class TdostVariant { Basic, Temporal, Llm, LlmTemporal };

std::string_view variant_name(TdostVariant v);  // "basic", "temporal", "llm", "llm_temporal"
/// Throws ConfigError.
TdostVariant parse_variant(std::string_view name);
inline bool is_llm_variant(TdostVariant v) { return v == TdostVariant::Llm || v == TdostVariant::LlmTemporal; }

struct RenderedTrigger {
    std::vector<std::string> sentences;  // 1 for basic/temporal, 3 for llm variants (1 after triplication)
    std::size_t source_event_index = 0;
    std::optional<std::int64_t> lag_seconds;
    bool is_sequence_head = false;
    std::optional<int> llm_slot;

    friend bool operator==(const RenderedTrigger&, const RenderedTrigger&) = default;
};

enum class TemporalPlacement {
    LagFirst,  // "After five seconds, <sentence>" / "<sentence> at seven hours AM"
    LagLast,   // "<sentence> five seconds later" / "at seven hours AM, <sentence>"
};

struct RenderOptions {
    TemporalPlacement placement = TemporalPlacement::LagFirst;
};

/// "in kitchen", but "between kitchen and back door" / "on garage door" / "near home entrance".
std::string located(std::string_view phrase);

/// Binary and other tokens verbatim; numbers spelled out.
std::string value_words(const SensorValue& value);

/// "<type> sensor in <location_basic> fired with value <value>"
std::string render_basic(const SensorEvent& event, const SensorMeta& meta);

/// Same sentence over location_granular. With a lag the relative-time phrase is added; without
/// one (sequence head) the clock time is.
std::string render_temporal(const SensorEvent& event, const SensorMeta& meta, std::optional<std::int64_t> lag,
                            const RenderOptions& options = {});

/// Adds the relative (or, for heads, absolute) time to one LLM sentence.
std::string add_time_to_generated(std::string_view sentence, const SensorEvent& event,
                                  std::optional<std::int64_t> lag, const RenderOptions& options = {});

/// One trigger per event. The first event is the sequence head; every later event carries
/// floor(t_i - t_{i-1}) seconds, clamped at zero for out-of-order timestamps. LLM variants need
/// `augmentation` and throw CacheMissError on a missing key. `first_index` offsets
/// source_event_index.
std::vector<RenderedTrigger> render_window(std::span<const SensorEvent> events, const HomeLayout& layout,
                                           TdostVariant variant, const AugmentationCache* augmentation,
                                           const RenderOptions& options = {}, std::size_t first_index = 0);

}  // namespace tdost
