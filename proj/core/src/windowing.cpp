#include "tdost/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "tdost/error.hpp"
#include "tdost/rng.hpp"

namespace tdost {

namespace {

std::string describe(const EventLog& log, std::size_t i) {
    const auto& ev = log.events[i];
    return "event " + std::to_string(i) + " (" + ev.timestamp.to_string() + " " + ev.sensor_id + ")";
}

void chunk_run(std::size_t begin, std::size_t end, CommonActivity label, const SegmentOptions& opt,
               Segmentation& out) {
    const std::size_t n = end - begin;
    const std::size_t step = opt.stride == 0 ? opt.window_size : opt.stride;
    for (std::size_t start = 0; start < n; start += step) {
        const std::size_t len = std::min(opt.window_size, n - start);
        if (len == opt.window_size || len >= opt.min_length) {
            out.pieces.push_back({label, begin + start, begin + start + len});
        } else {
            ++out.discarded.pieces;
            out.discarded.triggers += len;
        }
        if (start + len >= n) break;
    }
}

}  // namespace

std::vector<CommonActivity> label_events(const EventLog& log, const ActivityMap& map) {
    std::vector<CommonActivity> labels(log.events.size(), CommonActivity::Other);
    struct Open {
        std::string activity;
        CommonActivity label;
        std::size_t at;
    };
    std::vector<Open> open;
    auto find_open = [&open](const std::string& activity) {
        return std::find_if(open.begin(), open.end(), [&](const Open& o) { return o.activity == activity; });
    };

    for (std::size_t i = 0; i < log.events.size(); ++i) {
        const auto& ann = log.events[i].annotation;
        if (ann && ann->marker == Marker::Begin) {
            if (find_open(ann->activity) != open.end())
                throw SegmentationError("'" + ann->activity + " begin' at " + describe(log, i) +
                                        " while the activity is already open");
            open.push_back({ann->activity, map.translate(ann->activity), i});
            labels[i] = open.back().label;
        } else if (ann && ann->marker == Marker::End) {
            auto it = find_open(ann->activity);
            if (it == open.end())
                throw SegmentationError("'" + ann->activity + " end' at " + describe(log, i) + " has no matching begin");
            labels[i] = open.back().label;
            open.erase(it);
        } else if (!open.empty()) {
            labels[i] = open.back().label;
        }
    }
    if (!open.empty())
        throw SegmentationError("'" + open.front().activity + " begin' at " + describe(log, open.front().at) +
                                " has no matching end");
    return labels;
}

Segmentation segment(const EventLog& log, const ActivityMap& map, const SegmentOptions& options) {
    if (options.window_size == 0) throw std::invalid_argument("segment: window_size must be positive");
    const auto labels = label_events(log, map);
    Segmentation out;
    out.labeled_triggers = labels.size();
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= labels.size(); ++i) {
        if (i == labels.size() || labels[i] != labels[run_start]) {
            chunk_run(run_start, i, labels[run_start], options, out);
            run_start = i;
        }
    }
    return out;
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "";
}

std::vector<TdostWindow> build_windows(const EventLog& log, const Segmentation& segmentation, const HomeLayout& layout,
                                       TdostVariant variant, const AugmentationCache* augmentation,
                                       const RenderOptions& options) {
    std::vector<TdostWindow> out;
    out.reserve(segmentation.pieces.size());
    const std::span<const SensorEvent> events(log.events);
    for (std::size_t w = 0; w < segmentation.pieces.size(); ++w) {
        const auto& piece = segmentation.pieces[w];
        std::ostringstream id;
        id << log.home_id << "-w" << std::setw(5) << std::setfill('0') << w;
        TdostWindow win;
        win.window_id = id.str();
        win.group_id = win.window_id;
        win.home_id = log.home_id;
        win.label = piece.label;
        win.triggers = render_window(events.subspan(piece.begin, piece.size()), layout, variant, augmentation, options,
                                     piece.begin);
        out.push_back(std::move(win));
    }
    return out;
}

std::vector<TdostWindow> triplicate_llm(std::span<const TdostWindow> windows, TdostVariant variant) {
    if (!is_llm_variant(variant)) throw std::invalid_argument("triplicate_llm: variant must be llm or llm_temporal");
    std::vector<TdostWindow> out;
    out.reserve(windows.size() * 3);
    for (const auto& win : windows) {
        for (int slot = 0; slot < 3; ++slot) {
            TdostWindow copy;
            copy.window_id = win.window_id + "-s" + std::to_string(slot);
            copy.home_id = win.home_id;
            copy.group_id = win.group_id;
            copy.label = win.label;
            copy.llm_slot = slot;
            copy.triggers.reserve(win.triggers.size());
            for (const auto& t : win.triggers) {
                if (t.sentences.size() != 3)
                    throw std::invalid_argument("triplicate_llm: trigger without three sentences in " + win.window_id);
                RenderedTrigger single = t;
                single.sentences = {t.sentences[static_cast<std::size_t>(slot)]};
                single.llm_slot = slot;
                copy.triggers.push_back(std::move(single));
            }
            out.push_back(std::move(copy));
        }
    }
    return out;
}

FoldPlan::View FoldPlan::view(int fold) const {
    if (fold < 0 || static_cast<std::size_t>(fold) >= folds.size()) throw std::out_of_range("FoldPlan::view");
    View v;
    v.test = folds[static_cast<std::size_t>(fold)];
    for (std::size_t p = 0; p < folds.size(); ++p) {
        if (static_cast<int>(p) == fold) continue;
        const std::set<std::string> val_ids(val[p].begin(), val[p].end());
        for (const auto& id : folds[p]) (val_ids.count(id) ? v.val : v.train).push_back(id);
    }
    return v;
}

FoldAssignment FoldPlan::assignment_of(std::string_view window_id) const {
    for (std::size_t p = 0; p < folds.size(); ++p) {
        if (std::find(folds[p].begin(), folds[p].end(), window_id) == folds[p].end()) continue;
        const bool is_val = std::find(val[p].begin(), val[p].end(), window_id) != val[p].end();
        return {static_cast<int>(p), is_val ? Split::Val : Split::Train};
    }
    throw std::out_of_range("window '" + std::string(window_id) + "' is not in the fold plan");
}

FoldPlan make_folds(std::span<const TdostWindow> windows, std::uint64_t seed, const FoldOptions& options) {
    if (options.folds < 2) throw std::invalid_argument("make_folds: need at least two folds");
    const auto fold_count = static_cast<std::size_t>(options.folds);

    // Stratification units in first-appearance order.
    struct Unit {
        CommonActivity label;
        std::vector<std::size_t> members;  // indices into `windows`
    };
    std::vector<Unit> units;
    std::unordered_map<std::string, std::size_t> unit_of;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!ids.insert(windows[i].window_id).second)
            throw std::invalid_argument("make_folds: duplicate window id " + windows[i].window_id);
        const std::string& key = options.ungrouped_shuffle ? windows[i].window_id : windows[i].group_id;
        auto [it, fresh] = unit_of.emplace(key, units.size());
        if (fresh) units.push_back({windows[i].label, {}});
        units[it->second].members.push_back(i);
    }

    FoldPlan plan;
    plan.seed = seed;
    plan.folds.resize(fold_count);
    plan.val.resize(fold_count);

    Rng rng(derive_seed(seed, 0));
    std::vector<std::size_t> fold_of_window(windows.size());
    std::size_t offset = 0;
    for (auto label : all_common_activities()) {
        std::vector<std::size_t> cls;
        for (std::size_t u = 0; u < units.size(); ++u)
            if (units[u].label == label) cls.push_back(u);
        if (cls.empty()) continue;
        if (cls.size() < fold_count)
            plan.warnings.push_back("class '" + std::string(activity_name(label)) + "' has " +
                                    std::to_string(cls.size()) + " unit(s), fewer than " +
                                    std::to_string(fold_count) + " folds");
        rng.shuffle(cls);
        for (std::size_t k = 0; k < cls.size(); ++k)
            for (auto w : units[cls[k]].members) fold_of_window[w] = (offset + k) % fold_count;
        offset = (offset + cls.size()) % fold_count;
    }
    for (std::size_t w = 0; w < windows.size(); ++w) plan.folds[fold_of_window[w]].push_back(windows[w].window_id);

    for (std::size_t p = 0; p < fold_count; ++p) {
        Rng val_rng(derive_seed(seed, 100 + p));
        auto candidates = plan.folds[p];
        val_rng.shuffle(candidates);
        const auto n_val = static_cast<std::size_t>(std::llround(options.val_fraction * static_cast<double>(candidates.size())));
        candidates.resize(std::min(n_val, candidates.size()));
        // Keep the val list in window order for stable output.
        const std::set<std::string> chosen(candidates.begin(), candidates.end());
        for (const auto& id : plan.folds[p])
            if (chosen.count(id)) plan.val[p].push_back(id);
    }
    return plan;
}

void apply_folds(std::vector<TdostWindow>& windows, const FoldPlan& plan) {
    std::unordered_map<std::string, FoldAssignment> lookup;
    for (std::size_t p = 0; p < plan.folds.size(); ++p) {
        for (const auto& id : plan.folds[p]) lookup[id] = {static_cast<int>(p), Split::Train};
        for (const auto& id : plan.val[p]) lookup[id].split = Split::Val;
    }
    for (auto& w : windows) {
        auto it = lookup.find(w.window_id);
        if (it == lookup.end()) throw std::invalid_argument("apply_folds: window " + w.window_id + " not in plan");
        w.fold_assignment = it->second;
    }
}

std::string window_to_json(const TdostWindow& window) {
    nlohmann::ordered_json rec;
    rec["window_id"] = window.window_id;
    rec["home"] = window.home_id;
    rec["label"] = activity_name(window.label);
    if (window.fold_assignment) {
        rec["fold"] = window.fold_assignment->fold;
        rec["split"] = split_name(window.fold_assignment->split);
    } else {
        rec["fold"] = nullptr;
        rec["split"] = nullptr;
    }
    rec["llm_slot"] = window.llm_slot ? nlohmann::ordered_json(*window.llm_slot) : nlohmann::ordered_json(nullptr);
    auto& sentences = rec["sentences"] = nlohmann::ordered_json::array();
    auto& lags = rec["lags"] = nlohmann::ordered_json::array();
    for (const auto& t : window.triggers) {
        sentences.push_back(t.sentences);
        lags.push_back(t.lag_seconds ? nlohmann::ordered_json(*t.lag_seconds) : nlohmann::ordered_json(nullptr));
    }
    return rec.dump();
}

void write_windows_jsonl(std::ostream& out, std::span<const TdostWindow> windows) {
    for (const auto& w : windows) out << window_to_json(w) << '\n';
}

std::vector<TdostWindow> read_windows_jsonl(std::istream& in) {
    std::vector<TdostWindow> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            TdostWindow w;
            w.window_id = rec.at("window_id").get<std::string>();
            w.group_id = w.window_id;
            w.home_id = rec.at("home").get<std::string>();
            const auto label = parse_common_activity(rec.at("label").get<std::string>());
            if (!label) throw DataError("unknown label");
            w.label = *label;
            if (!rec.at("fold").is_null()) {
                FoldAssignment fa;
                fa.fold = rec.at("fold").get<int>();
                const auto split = rec.at("split").get<std::string>();
                fa.split = split == "val" ? Split::Val : split == "test" ? Split::Test : Split::Train;
                w.fold_assignment = fa;
            }
            if (!rec.at("llm_slot").is_null()) w.llm_slot = rec.at("llm_slot").get<int>();
            const auto& sentences = rec.at("sentences");
            const auto& lags = rec.at("lags");
            if (sentences.size() != lags.size()) throw DataError("sentences/lags length mismatch");
            for (std::size_t i = 0; i < sentences.size(); ++i) {
                RenderedTrigger t;
                t.sentences = sentences[i].get<std::vector<std::string>>();
                if (!lags[i].is_null()) t.lag_seconds = lags[i].get<std::int64_t>();
                t.is_sequence_head = i == 0;
                t.source_event_index = i;
                t.llm_slot = w.llm_slot;
                w.triggers.push_back(std::move(t));
            }
            out.push_back(std::move(w));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace tdost
