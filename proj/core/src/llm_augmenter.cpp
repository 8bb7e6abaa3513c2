#include "tdost/llm_augmenter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "tdost/error.hpp"
#include "tdost/verbalizer.hpp"

namespace tdost {

namespace {

constexpr std::string_view kPromptHeader =
    "You are an AI assistant that is helping in generating diverse texts and adding context to each sensor "
    "reading leveraging world knowledge.\n"
    "Please generate diverse text sentences (3) for each sensor trigger.\n"
    "You will be given a window of 5 sensor triggers. The given sensor trigger has the format: (Day of Week, "
    "Time on that day, sensor type, location context of the sensor,  Value of the Sensor).\n"
    "The output should be a JSON (key : (Day of Week, Time on that day, sensor type, location context of the "
    "sensor,  Value of the Sensor) ) containing a list of the generated sentences. \n"
    "Sensor Trigger Window: \n";

std::string quote(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    out += '\'';
    return out;
}

std::string trim_copy(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Splits "(a, 'b', \"c\")" into its fields. Returns nullopt when the text is not a tuple.
std::optional<std::vector<std::string>> split_tuple(std::string_view text) {
    auto t = trim_copy(text);
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') return std::nullopt;
    std::string_view body(t);
    body = body.substr(1, body.size() - 2);

    std::vector<std::string> fields;
    std::size_t i = 0;
    while (true) {
        while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        std::string field;
        if (i < body.size() && (body[i] == '\'' || body[i] == '"')) {
            const char q = body[i++];
            bool closed = false;
            while (i < body.size()) {
                char c = body[i++];
                if (c == '\\' && i < body.size()) {
                    field += body[i++];
                } else if (c == q) {
                    closed = true;
                    break;
                } else {
                    field += c;
                }
            }
            if (!closed) return std::nullopt;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        } else {
            const auto comma = body.find(',', i);
            field = trim_copy(body.substr(i, comma == std::string_view::npos ? std::string_view::npos : comma - i));
            i = comma == std::string_view::npos ? body.size() : comma;
        }
        fields.push_back(std::move(field));
        if (i >= body.size()) break;
        if (body[i] != ',') return std::nullopt;
        ++i;
    }
    return fields;
}

std::vector<std::string> key_fields(const TriggerKey& k) {
    return {k.weekday, k.period, k.sensor_type, k.location, k.value};
}

std::string strip_fences(std::string_view body) {
    const auto open = body.find("```");
    if (open == std::string_view::npos) return std::string(body);
    auto start = body.find('\n', open);
    if (start == std::string_view::npos) return std::string(body);
    ++start;
    const auto close = body.find("```", start);
    return std::string(body.substr(start, close == std::string_view::npos ? std::string_view::npos : close - start));
}

}  // namespace

std::string TriggerKey::canonical() const {
    return "(" + quote(weekday) + ", " + quote(period) + ", " + quote(sensor_type) + ", " + quote(location) + ", " +
           quote(value) + ")";
}

TriggerKey TriggerKey::parse(std::string_view text) {
    auto fields = split_tuple(text);
    if (!fields || fields->size() != 5) throw DataError("malformed trigger key '" + std::string(text) + "'");
    auto& f = *fields;
    return TriggerKey{f[0], f[1], f[2], f[3], f[4]};
}

TriggerKey make_trigger_key(const SensorEvent& event, const SensorMeta& meta) {
    std::string type(sensor_type_name(meta.sensor_type));
    type[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(type[0])));
    return TriggerKey{
        std::string(verbalizer::weekday_name(event.timestamp.date)),
        std::string(verbalizer::period_name(verbalizer::period_of_day(event.timestamp.hour()))),
        std::move(type),
        meta.location_granular,
        event.value.normalized,
    };
}

std::vector<TriggerKey> collect_trigger_keys(const EventLog& log, const HomeLayout& layout, bool skip_unknown) {
    std::vector<TriggerKey> out;
    std::set<TriggerKey> seen;
    for (const auto& ev : log.events) {
        const auto* meta = layout.find(ev.sensor_id);
        if (!meta) {
            if (skip_unknown) continue;
            throw UnresolvedSensorError(ev.sensor_id);
        }
        auto key = make_trigger_key(ev, *meta);
        if (seen.insert(key).second) out.push_back(std::move(key));
    }
    return out;
}

const SentenceTriple* AugmentationCache::find(const TriggerKey& key) const {
    auto it = entries_.find(key.canonical());
    return it == entries_.end() ? nullptr : &it->second.sentences;
}

void AugmentationCache::insert(const TriggerKey& key, SentenceTriple sentences, Provenance provenance) {
    for (const auto& s : sentences)
        if (trim_copy(s).empty()) throw std::invalid_argument("augmentation cache: empty sentence for " + key.canonical());
    entries_[key.canonical()] = Entry{key, std::move(sentences), std::move(provenance)};
}

AugmentationCache AugmentationCache::load(std::istream& in) {
    AugmentationCache cache;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim_copy(line).empty()) continue;
        const std::string ctx = "augmentation cache line " + std::to_string(line_no);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(ctx + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("key") || !rec["key"].is_string() || !rec.contains("sentences") ||
            !rec["sentences"].is_array() || rec["sentences"].size() != 3)
            throw DataError(ctx + ": expected {\"key\": str, \"sentences\": [3 strings], \"provenance\": {...}}");
        SentenceTriple triple;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!rec["sentences"][i].is_string()) throw DataError(ctx + ": sentences must be strings");
            triple[i] = rec["sentences"][i].get<std::string>();
            if (trim_copy(triple[i]).empty()) throw DataError(ctx + ": empty sentence");
        }
        Provenance prov;
        if (auto p = rec.find("provenance"); p != rec.end() && p->is_object()) {
            prov.model = p->value("model", std::string{});
            prov.retrieved = p->value("retrieved", std::string{});
        }
        cache.insert(TriggerKey::parse(rec["key"].get<std::string>()), std::move(triple), std::move(prov));
    }
    return cache;
}

AugmentationCache AugmentationCache::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open augmentation cache '" + path + "'");
    return load(in);
}

void AugmentationCache::save(std::ostream& out) const {
    for (const auto& [canon, e] : entries_) {
        nlohmann::ordered_json rec;
        rec["key"] = canon;
        rec["sentences"] = e.sentences;
        rec["provenance"] = {{"model", e.provenance.model}, {"retrieved", e.provenance.retrieved}};
        out << rec.dump() << '\n';
    }
}

void AugmentationCache::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write augmentation cache '" + path + "'");
    save(out);
}

PromptBatch build_prompt(std::span<const TriggerKey> keys) {
    if (keys.empty() || keys.size() > kPromptWindow)
        throw std::invalid_argument("build_prompt: expected 1 to 5 trigger keys, got " + std::to_string(keys.size()));
    PromptBatch batch;
    batch.real_count = keys.size();
    batch.keys.assign(keys.begin(), keys.end());
    while (batch.keys.size() < kPromptWindow) batch.keys.push_back(keys.back());

    batch.text = kPromptHeader;
    for (std::size_t i = 0; i < batch.keys.size(); ++i) {
        if (i) batch.text += '\n';
        batch.text += batch.keys[i].canonical();
    }
    return batch;
}

std::map<TriggerKey, SentenceTriple> parse_response(std::string_view body, std::span<const TriggerKey> expected) {
    std::string text = strip_fences(body);
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw AugmentationFormatError("augmentation response contains no JSON object");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.substr(open, close - open + 1));
    } catch (const nlohmann::json::parse_error& e) {
        throw AugmentationFormatError(std::string("augmentation response is not valid JSON: ") + e.what());
    }

    std::map<TriggerKey, SentenceTriple> out;
    for (const auto& [raw_key, value] : doc.items()) {
        auto fields = split_tuple(raw_key);
        if (!fields || fields->size() != 5) continue;
        for (auto& f : *fields) f = lower(trim_copy(f));
        const auto match = std::find_if(expected.begin(), expected.end(), [&](const TriggerKey& k) {
            auto kf = key_fields(k);
            for (auto& f : kf) f = lower(f);
            return kf == *fields;
        });
        if (match == expected.end()) continue;
        if (!value.is_array() || value.size() != 3)
            throw AugmentationFormatError("expected 3 sentences for " + match->canonical());
        SentenceTriple triple;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!value[i].is_string() || trim_copy(value[i].get<std::string>()).empty())
                throw AugmentationFormatError("empty or non-string sentence for " + match->canonical());
            triple[i] = trim_copy(value[i].get<std::string>());
        }
        out[*match] = std::move(triple);
    }
    for (const auto& k : expected)
        if (!out.count(k)) throw AugmentationFormatError("augmentation response is missing key " + k.canonical());
    return out;
}

AugmentStats augment(std::span<const TriggerKey> keys, AugmentationCache& cache, ChatClient* client,
                     const AugmentOptions& options) {
    AugmentStats stats;
    std::vector<TriggerKey> missing;
    std::set<TriggerKey> seen;
    for (const auto& k : keys) {
        if (!seen.insert(k).second) continue;
        if (cache.find(k))
            ++stats.cache_hits;
        else
            missing.push_back(k);
    }
    stats.distinct_keys = seen.size();

    if (options.mode == AugmentMode::Offline) {
        if (!missing.empty()) throw CacheMissError(missing.front().canonical());
        return stats;
    }
    if (missing.empty()) return stats;
    if (!client) throw ConfigError("live augmentation requires a chat client");

    struct BatchResult {
        std::map<TriggerKey, SentenceTriple> sentences;
        std::size_t retries = 0;
    };
    auto run_batch = [client, &options](std::vector<TriggerKey> batch_keys) {
        const auto prompt = build_prompt(batch_keys);
        const std::span<const TriggerKey> expected(prompt.keys.data(), prompt.real_count);
        BatchResult result;
        for (int attempt = 0;; ++attempt) {
            try {
                result.sentences = parse_response(client->complete(prompt.text), expected);
                return result;
            } catch (const AugmentationFormatError&) {
                if (attempt >= options.max_format_retries) throw;
                ++result.retries;
            }
        }
    };

    std::vector<std::vector<TriggerKey>> batches;
    for (std::size_t i = 0; i < missing.size(); i += kPromptWindow)
        batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(i),
                             missing.begin() + static_cast<std::ptrdiff_t>(std::min(i + kPromptWindow, missing.size())));

    // Batches run concurrently in groups; results are merged here, on one thread, in batch order.
    const std::size_t in_flight = std::max<std::size_t>(1, options.max_in_flight);
    const Provenance prov{client->model_name(), options.retrieved_date};
    for (std::size_t start = 0; start < batches.size(); start += in_flight) {
        std::vector<std::future<BatchResult>> pending;
        const std::size_t end = std::min(start + in_flight, batches.size());
        for (std::size_t b = start; b < end; ++b)
            pending.push_back(std::async(in_flight == 1 ? std::launch::deferred : std::launch::async, run_batch,
                                         batches[b]));
        for (auto& f : pending) {
            auto result = f.get();
            ++stats.prompts_issued;
            stats.format_retries += result.retries;
            stats.prompts_issued += result.retries;
            for (auto& [k, triple] : result.sentences) {
                cache.insert(k, std::move(triple), prov);
                ++stats.new_entries;
            }
        }
    }
    return stats;
}

}  // namespace tdost
