#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdost/event_log.hpp"
#include "tdost/home_metadata.hpp"

namespace tdost {

/// (Day of Week, Time on that day, sensor type, location context, value): the unit the LLM
/// describes and the cache key. Clock times never enter the key.
struct TriggerKey {
    std::string weekday;
    std::string period;
    std::string sensor_type;
    std::string location;
    std::string value;

    /// "('Monday', 'Early Morning', 'Motion', 'bathroom', 'OFF')"
    std::string canonical() const;
    /// Inverse of canonical(); throws DataError.
    static TriggerKey parse(std::string_view text);

    friend auto operator<=>(const TriggerKey&, const TriggerKey&) = default;
};

TriggerKey make_trigger_key(const SensorEvent& event, const SensorMeta& meta);

/// Distinct keys of a log in order of first appearance. Events whose sensor is missing from the
/// layout are skipped when `skip_unknown` is set, otherwise UnresolvedSensorError propagates.
std::vector<TriggerKey> collect_trigger_keys(const EventLog& log, const HomeLayout& layout, bool skip_unknown = false);

using SentenceTriple = std::array<std::string, 3>;

struct Provenance {
    std::string model;
    std::string retrieved;  // YYYY-MM-DD

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

class AugmentationCache {
public:
    struct Entry {
        TriggerKey key;
        SentenceTriple sentences;
        Provenance provenance;
    };

    const SentenceTriple* find(const TriggerKey& key) const;
    /// Throws std::invalid_argument on empty sentences.
    void insert(const TriggerKey& key, SentenceTriple sentences, Provenance provenance);
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// JSONL, one {"key", "sentences", "provenance"} record per line, sorted by canonical key.
    static AugmentationCache load(std::istream& in);
    static AugmentationCache load_file(const std::string& path);
    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;  // keyed by canonical string
};

inline constexpr std::size_t kPromptWindow = 5;

struct PromptBatch {
    std::string text;
    std::vector<TriggerKey> keys;  // always kPromptWindow long
    std::size_t real_count = 0;    // keys before padding
    bool padded() const { return real_count < keys.size(); }
};

/// Instruction text followed by one tuple line per key. 1..5 keys; short batches repeat the last
/// key. Throws std::invalid_argument otherwise.
PromptBatch build_prompt(std::span<const TriggerKey> keys);

/// Strips ``` fences, parses the JSON object and returns the three sentences for each expected key.
/// Keys in the body may be quoted tuples or bare "(Monday, Night, ...)" forms. Throws
/// AugmentationFormatError.
std::map<TriggerKey, SentenceTriple> parse_response(std::string_view body, std::span<const TriggerKey> expected);

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the assistant message text. Throws ExternalError.
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::string model_name() const = 0;
};

enum class AugmentMode { Live, Offline };

struct AugmentOptions {
    AugmentMode mode = AugmentMode::Offline;
    int max_format_retries = 3;
    std::size_t max_in_flight = 4;
    std::string retrieved_date;  // recorded in provenance
};

struct AugmentStats {
    std::size_t distinct_keys = 0;
    std::size_t cache_hits = 0;
    std::size_t prompts_issued = 0;
    std::size_t new_entries = 0;
    std::size_t format_retries = 0;
};

/// Ensures the cache covers every key. Offline mode only checks (CacheMissError on the first
/// missing key); live mode prompts for the missing keys in disjoint batches of five.
AugmentStats augment(std::span<const TriggerKey> keys, AugmentationCache& cache, ChatClient* client,
                     const AugmentOptions& options);

}  // namespace tdost
