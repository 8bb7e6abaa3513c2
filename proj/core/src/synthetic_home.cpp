#include "tdost/synthetic_home.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tdost/error.hpp"
#include "tdost/rng.hpp"

namespace tdost::synthetic {

namespace {

using nlohmann::json;

constexpr std::int64_t kMicros = 1'000'000;

Range parse_range(const json& j, const std::string& ctx) {
    try {
        Range r{j.at("mean").get<double>(), j.value("sd", 0.0), j.at("min").get<double>(), j.at("max").get<double>()};
        if (r.min > r.max || r.sd < 0) throw ConfigError(ctx + ": invalid range");
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(ctx + ": " + e.what());
    }
}

double draw(Rng& rng, const Range& r) { return rng.truncated_normal(r.mean, r.sd, r.min, r.max); }

int draw_count(Rng& rng, const Range& r) { return std::max(1, static_cast<int>(std::lround(draw(rng, r)))); }

// Seconds plus sub-second jitter, in microseconds; at least one second.
std::int64_t step_micros(Rng& rng, double seconds) {
    const auto whole = std::max<std::int64_t>(1, static_cast<std::int64_t>(seconds));
    return whole * kMicros + static_cast<std::int64_t>(rng.below(kMicros));
}

std::string temperature_token(double value) {
    const double halves = std::round(value * 2.0) / 2.0;
    std::ostringstream os;
    if (halves == std::floor(halves))
        os << static_cast<long long>(halves);
    else
        os << std::fixed << std::setprecision(1) << halves;
    return os.str();
}

struct PlacedSensor {
    std::string id;
    SensorType type;
    std::string granular;
};

// Sensors per room key, in template order.
std::vector<std::pair<std::string, std::vector<PlacedSensor>>> place_sensors(const HomeTemplate& tmpl) {
    std::vector<std::pair<std::string, std::vector<PlacedSensor>>> out;
    std::map<SensorType, int> counters;
    int shared = tmpl.ids.start;
    for (const auto& room : tmpl.rooms) {
        auto& placed = out.emplace_back(room.key, std::vector<PlacedSensor>{}).second;
        std::size_t landmark = 0;
        for (const auto& [type, count] : room.sensors) {
            for (int i = 0; i < count; ++i) {
                const int number = tmpl.ids.shared_counter ? shared++ : tmpl.ids.start + counters[type]++;
                auto it = tmpl.ids.prefixes.find(type);
                std::ostringstream id;
                id << (it == tmpl.ids.prefixes.end() ? "X" : it->second) << std::setw(tmpl.ids.width)
                   << std::setfill('0') << number;
                std::string granular = room.phrase;
                if (!room.landmarks.empty()) granular += " " + room.landmarks[landmark++ % room.landmarks.size()];
                placed.push_back({id.str(), type, std::move(granular)});
            }
        }
    }
    return out;
}

struct Episode {
    std::int64_t planned;  // micros from start date midnight
    std::size_t activity;
};

class Generator {
public:
    Generator(const HomeTemplate& tmpl, const GenerationRecipe& recipe)
        : tmpl_(tmpl), recipe_(recipe), rng_(derive_seed(recipe.seed, 0x5EED)) {
        start_ = parse_timestamp(recipe.start_date, "00:00:00", 0).date;
        for (auto& [key, placed] : place_sensors(tmpl)) sensors_[key] = std::move(placed);
    }

    EventLog run() {
        std::vector<Episode> episodes;
        for (int d = 0; d < recipe_.days; ++d) {
            for (std::size_t a = 0; a < tmpl_.activities.size(); ++a) {
                const auto& script = tmpl_.activities[a];
                for (const auto& hours : script.start_hours) {
                    const double h = draw(rng_, hours);
                    episodes.push_back({static_cast<std::int64_t>((d * 24.0 + h) * 3600.0 * kMicros), a});
                }
            }
        }
        std::stable_sort(episodes.begin(), episodes.end(),
                         [](const Episode& x, const Episode& y) { return x.planned < y.planned; });

        EventLog log;
        log.home_id = tmpl_.home_id;
        std::int64_t cursor = 0;
        for (const auto& ep : episodes) {
            const std::int64_t begin = std::max(ep.planned, cursor + 60 * kMicros);
            emit_noise(log, cursor, begin);
            cursor = emit_episode(log, tmpl_.activities[ep.activity], begin);
        }
        return log;
    }

private:
    const PlacedSensor* pick(const std::string& room, SensorType type) {
        std::vector<const PlacedSensor*> candidates;
        for (const auto& s : sensors_[room])
            if (s.type == type) candidates.push_back(&s);
        if (candidates.empty()) return nullptr;
        return candidates[static_cast<std::size_t>(rng_.below(candidates.size()))];
    }

    Timestamp at(std::int64_t micros) const {
        Timestamp ts;
        const auto days = micros / (86400 * kMicros);
        ts.date = start_ + std::chrono::days{days};
        ts.time_of_day = std::chrono::microseconds{micros - days * 86400 * kMicros};
        ts.fraction_digits = 6;
        return ts;
    }

    void push(EventLog& log, std::int64_t t, const std::string& id, const std::string& token) {
        last_ = t;
        SensorEvent ev;
        ev.timestamp = at(t);
        ev.sensor_id = id;
        ev.value = SensorValue::classify(token);
        log.events.push_back(std::move(ev));
    }

    void emit_noise(EventLog& log, std::int64_t from, std::int64_t until) {
        if (recipe_.noise_rate <= 0.0) return;
        std::vector<const PlacedSensor*> motion;
        for (const auto& room : tmpl_.rooms)
            for (const auto& s : sensors_[room.key])
                if (s.type == SensorType::Motion) motion.push_back(&s);
        std::int64_t t = from;
        while (true) {
            double u = rng_.uniform();
            while (u <= 0.0) u = rng_.uniform();
            t += static_cast<std::int64_t>(-std::log(u) / recipe_.noise_rate * 3600.0 * kMicros) + 1;
            if (t >= until - 30 * kMicros) break;
            const auto* s = motion[static_cast<std::size_t>(rng_.below(motion.size()))];
            push(log, t, s->id, rng_.bernoulli(0.5) ? "ON" : "OFF");
        }
    }

    std::string next_room(const ActivityScript& script, const std::string& current) {
        if (rng_.bernoulli(script.stay) || script.room_weights.size() < 2) return current;
        double total = 0;
        for (const auto& [room, w] : script.room_weights)
            if (room != current) total += w;
        if (total <= 0) return current;
        double x = rng_.uniform() * total;
        for (const auto& [room, w] : script.room_weights) {
            if (room == current) continue;
            if (x < w) return room;
            x -= w;
        }
        return current;
    }

    std::int64_t emit_episode(EventLog& log, const ActivityScript& script, std::int64_t t) {
        const std::size_t first = log.events.size();
        std::string room = script.start_room;
        const int visits = draw_count(rng_, script.visits);
        for (int v = 0; v < visits; ++v) {
            if (v > 0) room = next_room(script, room);
            if (script.door_prob > 0 && rng_.bernoulli(script.door_prob)) {
                if (const auto* door = pick(room, SensorType::Door)) {
                    push(log, t, door->id, "OPEN");
                    t += step_micros(rng_, 2 + static_cast<double>(rng_.below(5)));
                    push(log, t, door->id, "CLOSE");
                    t += step_micros(rng_, draw(rng_, script.gap_seconds));
                }
            }
            const int firings = draw_count(rng_, script.firings_per_visit);
            for (int f = 0; f < firings; ++f) {
                const auto* motion = pick(room, SensorType::Motion);
                push(log, t, motion->id, "ON");
                t += step_micros(rng_, 1 + static_cast<double>(rng_.below(4)));
                push(log, t, motion->id, "OFF");
                t += step_micros(rng_, draw(rng_, script.gap_seconds));
            }
            if (script.temperature_prob > 0 && rng_.bernoulli(script.temperature_prob)) {
                if (const auto* temp = pick(room, SensorType::Temperature)) {
                    const auto& r = room_of(room);
                    push(log, t, temp->id,
                         temperature_token(r.base_temperature + script.temperature_shift + rng_.normal(0.0, 0.7)));
                    t += step_micros(rng_, draw(rng_, script.gap_seconds));
                }
            }
        }
        log.events[first].annotation = Annotation{script.raw_label, Marker::Begin};
        log.events.back().annotation = Annotation{script.raw_label, Marker::End};
        return last_;
    }

    const Room& room_of(const std::string& key) const {
        for (const auto& r : tmpl_.rooms)
            if (r.key == key) return r;
        throw ConfigError("unknown room " + key);
    }

    const HomeTemplate& tmpl_;
    const GenerationRecipe& recipe_;
    Rng rng_;
    std::chrono::sys_days start_{};
    std::int64_t last_ = 0;
    std::map<std::string, std::vector<PlacedSensor>> sensors_;
};

}  // namespace

void HomeTemplate::validate() const {
    if (home_id.empty()) throw ConfigError("template: empty home_id");
    if (activities.size() < 4) throw ConfigError("template " + home_id + ": needs at least 4 activities");
    std::set<std::string> keys;
    for (const auto& r : rooms) {
        if (!keys.insert(r.key).second) throw ConfigError("template " + home_id + ": duplicate room " + r.key);
        if (auto problem = location_phrase_problem(r.phrase))
            throw ConfigError("template " + home_id + ": room " + r.key + ": " + *problem);
    }
    auto has_motion = [&](const std::string& key) {
        for (const auto& r : rooms)
            if (r.key == key) {
                auto it = r.sensors.find(SensorType::Motion);
                return it != r.sensors.end() && it->second > 0;
            }
        return false;
    };
    for (const auto& a : activities) {
        if (a.start_hours.empty()) throw ConfigError("activity " + a.raw_label + ": needs an episode per day");
        if (!keys.count(a.start_room)) throw ConfigError("activity " + a.raw_label + ": unknown room " + a.start_room);
        for (const auto& [room, w] : a.room_weights) {
            if (!keys.count(room)) throw ConfigError("activity " + a.raw_label + ": unknown room " + room);
            if (!has_motion(room)) throw ConfigError("activity " + a.raw_label + ": room " + room + " has no motion sensor");
        }
        if (!has_motion(a.start_room))
            throw ConfigError("activity " + a.raw_label + ": room " + a.start_room + " has no motion sensor");
    }
}

HomeTemplate load_template(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("template is not valid JSON: ") + e.what());
    }
    HomeTemplate t;
    try {
        t.home_id = doc.at("home_id").get<std::string>();
        t.description = doc.value("description", std::string{});
        t.residents = doc.value("residents", 1);
        const auto& ids = doc.at("id_scheme");
        for (const auto& [type, prefix] : ids.at("prefixes").items())
            t.ids.prefixes[parse_sensor_type(type)] = prefix.get<std::string>();
        t.ids.start = ids.value("start", 1);
        t.ids.width = ids.value("width", 3);
        t.ids.shared_counter = ids.value("shared_counter", false);

        for (const auto& r : doc.at("rooms")) {
            Room room;
            room.key = r.at("key").get<std::string>();
            room.phrase = r.at("phrase").get<std::string>();
            room.landmarks = r.value("landmarks", std::vector<std::string>{});
            room.base_temperature = r.value("base_temperature", 21.0);
            for (const auto& [type, count] : r.at("sensors").items())
                room.sensors[parse_sensor_type(type)] = count.get<int>();
            t.rooms.push_back(std::move(room));
        }
        for (const auto& a : doc.at("activities")) {
            ActivityScript s;
            s.raw_label = a.at("label").get<std::string>();
            const auto common = parse_common_activity(a.at("common").get<std::string>());
            if (!common) throw ConfigError("activity " + s.raw_label + ": unknown common label");
            s.common = *common;
            const std::string ctx = "activity " + s.raw_label;
            for (const auto& h : a.at("start_hours")) s.start_hours.push_back(parse_range(h, ctx + " start_hours"));
            s.start_room = a.at("start_room").get<std::string>();
            for (const auto& [room, w] : a.at("rooms").items()) s.room_weights[room] = w.get<double>();
            s.stay = a.value("stay", 0.5);
            s.visits = parse_range(a.at("visits"), ctx + " visits");
            s.firings_per_visit = parse_range(a.at("firings_per_visit"), ctx + " firings_per_visit");
            s.gap_seconds = parse_range(a.at("gap_seconds"), ctx + " gap_seconds");
            s.door_prob = a.value("door_prob", 0.0);
            s.temperature_prob = a.value("temperature_prob", 0.0);
            s.temperature_shift = a.value("temperature_shift", 0.0);
            t.activities.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("template: ") + e.what());
    } catch (const LayoutError& e) {
        throw ConfigError(std::string("template: ") + e.what());
    }
    t.validate();
    return t;
}

HomeTemplate load_template_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open template " + path);
    return load_template(in);
}

HomeLayout layout_for(const HomeTemplate& tmpl) {
    HomeLayout layout;
    layout.home_id = tmpl.home_id;
    layout.residents = tmpl.residents;
    layout.description = tmpl.description;
    const auto placed = place_sensors(tmpl);
    for (std::size_t r = 0; r < placed.size(); ++r) {
        for (const auto& s : placed[r].second) {
            SensorMeta meta{s.id, s.type, tmpl.rooms[r].phrase, s.granular};
            if (!layout.sensors.emplace(s.id, std::move(meta)).second)
                throw ConfigError("template " + tmpl.home_id + ": id collision " + s.id);
        }
    }
    return layout;
}

ActivityMap activity_map_for(const HomeTemplate& tmpl) {
    std::vector<std::pair<std::string, CommonActivity>> entries;
    std::set<std::string> seen;
    for (const auto& a : tmpl.activities)
        if (seen.insert(a.raw_label).second) entries.emplace_back(a.raw_label, a.common);
    return ActivityMap(tmpl.home_id, std::move(entries));
}

HomeBundle generate(const HomeTemplate& tmpl, const GenerationRecipe& recipe) {
    tmpl.validate();
    if (recipe.days < 1) throw ConfigError("generation needs at least one day");
    if (recipe.noise_rate < 0) throw ConfigError("noise rate must be non-negative");
    Generator gen(tmpl, recipe);
    return HomeBundle{gen.run(), layout_for(tmpl), activity_map_for(tmpl)};
}

std::pair<HomeBundle, HomeBundle> paired_homes(const HomeTemplate& a, const HomeTemplate& b, std::uint64_t seed,
                                               int days, double noise_rate) {
    const auto la = layout_for(a);
    const auto lb = layout_for(b);
    for (const auto& [id, meta] : la.sensors)
        if (lb.sensors.count(id)) throw ConfigError("paired homes share sensor id " + id);
    const auto shared = common_label_set(activity_map_for(a), activity_map_for(b));
    if (shared.size() < 6) throw ConfigError("paired homes share fewer than six activity labels");
    GenerationRecipe ra{derive_seed(seed, 1), days, a.residents, noise_rate, "2011-06-06"};
    GenerationRecipe rb{derive_seed(seed, 2), days, b.residents, noise_rate, "2011-06-06"};
    return {generate(a, ra), generate(b, rb)};
}

}  // namespace tdost::synthetic
