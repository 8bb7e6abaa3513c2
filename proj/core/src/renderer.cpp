#include "tdost/renderer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "tdost/error.hpp"
#include "tdost/verbalizer.hpp"

namespace tdost {

namespace {

bool starts_with_word(std::string_view s, std::string_view word) {
    return s.size() > word.size() && s.substr(0, word.size()) == word && s[word.size()] == ' ';
}

std::string core_sentence(const SensorEvent& event, const SensorMeta& meta, std::string_view location) {
    std::string out(sensor_type_name(meta.sensor_type));
    out += " sensor ";
    out += located(location);
    out += " fired with value ";
    out += value_words(event.value);
    return out;
}

std::string clock_of(const SensorEvent& event) {
    return verbalizer::clock_to_words(event.timestamp.hour(), event.timestamp.minute());
}

// Generated sentences start capitalised; once a lag phrase precedes them the first word is
// lowered unless it looks like a name ("Thursday's") or an acronym.
std::string lower_first_word(std::string_view sentence) {
    static constexpr std::array<std::string_view, 8> kKeepCase{"Monday",   "Tuesday", "Wednesday", "Thursday",
                                                               "Friday",   "Saturday", "Sunday",   "I"};
    std::string out(sentence);
    if (out.empty() || !std::isupper(static_cast<unsigned char>(out[0]))) return out;
    std::size_t end = 0;
    while (end < out.size() && std::isalpha(static_cast<unsigned char>(out[end]))) ++end;
    const std::string_view word(out.data(), end);
    for (auto keep : kKeepCase)
        if (word == keep) return out;
    if (end > 1 && std::isupper(static_cast<unsigned char>(out[1]))) return out;
    out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
    return out;
}

std::string without_final_period(std::string_view s) {
    while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.remove_suffix(1);
    return std::string(s);
}

}  // namespace

std::string_view variant_name(TdostVariant v) {
    switch (v) {
        case TdostVariant::Basic: return "basic";
        case TdostVariant::Temporal: return "temporal";
        case TdostVariant::Llm: return "llm";
        case TdostVariant::LlmTemporal: return "llm_temporal";
    }
    return "";
}

TdostVariant parse_variant(std::string_view name) {
    for (auto v : {TdostVariant::Basic, TdostVariant::Temporal, TdostVariant::Llm, TdostVariant::LlmTemporal})
        if (variant_name(v) == name) return v;
    throw ConfigError("unknown TDOST variant '" + std::string(name) + "' (basic|temporal|llm|llm_temporal)");
}

std::string located(std::string_view phrase) {
    for (std::string_view prep : {"between", "on", "near", "in"})
        if (starts_with_word(phrase, prep)) return std::string(phrase);
    return "in " + std::string(phrase);
}

std::string value_words(const SensorValue& value) {
    if (value.kind != ValueKind::Numeric) return value.token;
    std::string_view canon = value.normalized;
    if (!canon.empty() && canon.front() == '-') return "minus " + verbalizer::decimal_to_words(canon.substr(1));
    return verbalizer::decimal_to_words(canon);
}

std::string render_basic(const SensorEvent& event, const SensorMeta& meta) {
    return core_sentence(event, meta, meta.location_basic);
}

std::string render_temporal(const SensorEvent& event, const SensorMeta& meta, std::optional<std::int64_t> lag,
                            const RenderOptions& options) {
    const auto sentence = core_sentence(event, meta, meta.location_granular);
    const bool lag_first = options.placement == TemporalPlacement::LagFirst;
    if (lag) {
        const auto n = std::max<std::int64_t>(*lag, 0);
        return lag_first ? verbalizer::lag_phrase(n, verbalizer::LagStyle::Prefix) + sentence
                         : sentence + verbalizer::lag_phrase(n, verbalizer::LagStyle::Suffix);
    }
    return lag_first ? sentence + " " + clock_of(event) : clock_of(event) + ", " + sentence;
}

std::string add_time_to_generated(std::string_view sentence, const SensorEvent& event,
                                  std::optional<std::int64_t> lag, const RenderOptions& options) {
    const bool lag_first = options.placement == TemporalPlacement::LagFirst;
    if (lag) {
        const auto n = std::max<std::int64_t>(*lag, 0);
        if (lag_first) return verbalizer::lag_phrase(n, verbalizer::LagStyle::Prefix) + lower_first_word(sentence);
        return without_final_period(sentence) + verbalizer::lag_phrase(n, verbalizer::LagStyle::Suffix) + ".";
    }
    if (lag_first) return without_final_period(sentence) + " " + clock_of(event);
    std::string clock = clock_of(event);
    clock[0] = 'A';
    return clock + ", " + lower_first_word(sentence);
}

std::vector<RenderedTrigger> render_window(std::span<const SensorEvent> events, const HomeLayout& layout,
                                           TdostVariant variant, const AugmentationCache* augmentation,
                                           const RenderOptions& options, std::size_t first_index) {
    if (is_llm_variant(variant) && !augmentation)
        throw ConfigError(std::string(variant_name(variant)) + " rendering requires an augmentation cache");

    std::vector<RenderedTrigger> out;
    out.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        const auto& meta = layout.lookup(ev.sensor_id);

        RenderedTrigger trig;
        trig.source_event_index = first_index + i;
        trig.is_sequence_head = i == 0;
        if (i > 0)
            trig.lag_seconds = std::max<std::int64_t>(0, floor_seconds_between(events[i - 1].timestamp, ev.timestamp));

        switch (variant) {
            case TdostVariant::Basic: trig.sentences.push_back(render_basic(ev, meta)); break;
            case TdostVariant::Temporal:
                trig.sentences.push_back(render_temporal(ev, meta, trig.lag_seconds, options));
                break;
            case TdostVariant::Llm:
            case TdostVariant::LlmTemporal: {
                const auto key = make_trigger_key(ev, meta);
                const auto* triple = augmentation->find(key);
                if (!triple) throw CacheMissError(key.canonical());
                for (const auto& s : *triple)
                    trig.sentences.push_back(variant == TdostVariant::Llm
                                                 ? s
                                                 : add_time_to_generated(s, ev, trig.lag_seconds, options));
                break;
            }
        }
        out.push_back(std::move(trig));
    }
    return out;
}

}  // namespace tdost
