#include "tdost/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tdost/error.hpp"
#include "tdost/rng.hpp"
#include "tdost/sha256.hpp"
#include "tdost/synthetic_home.hpp"

namespace tdost {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string_view classifier_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::BiLstm: return "bilstm";
        case ClassifierKind::ConvBiLstm: return "convbilstm";
        case ClassifierKind::BaselineIds: return "baseline_ids";
    }
    return "bilstm";
}

ClassifierKind parse_classifier(std::string_view name) {
    if (name == "bilstm") return ClassifierKind::BiLstm;
    if (name == "convbilstm") return ClassifierKind::ConvBiLstm;
    if (name == "baseline_ids") return ClassifierKind::BaselineIds;
    throw ConfigError("unknown classifier '" + std::string(name) + "' (expected bilstm, convbilstm, baseline_ids)");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_exists(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw ConfigError(what + " does not exist: " + p.string());
}

std::string relative_name(const ExperimentConfig& config, const fs::path& p) {
    auto rel = p.lexically_relative(config.base_dir);
    return (rel.empty() ? p : rel).generic_string();
}

TemporalPlacement parse_placement(const std::string& s) {
    if (s == "lag_first") return TemporalPlacement::LagFirst;
    if (s == "lag_last") return TemporalPlacement::LagLast;
    throw ConfigError("unknown temporal_placement '" + s + "' (expected lag_first, lag_last)");
}

std::string_view placement_name(TemporalPlacement p) {
    return p == TemporalPlacement::LagFirst ? "lag_first" : "lag_last";
}

}  // namespace

void ExperimentConfig::validate() const {
    require_seed();
    if (source.empty()) throw ConfigError("config: source home is required");
    if (!homes.count(source)) throw ConfigError("config: source home '" + source + "' is not described under homes");
    std::set<std::string> seen;
    for (const auto& t : targets) {
        if (t == source) throw ConfigError("config: source home '" + source + "' is also a target");
        if (!homes.count(t)) throw ConfigError("config: target home '" + t + "' is not described under homes");
        if (!seen.insert(t).second) throw ConfigError("config: target home '" + t + "' listed twice");
    }
    embedding.validate();
    if (embedding.provider == EmbeddingProvider::External && (!embedding_sentences || !embedding_matrix))
        throw ConfigError("config: external embeddings need embedding.sentences and embedding.matrix");
    if (!features_only && !trainer_command)
        throw ConfigError("config: trainer_command is required unless features_only is set");
    if (windows.window_size == 0) throw ConfigError("config: window size must be positive");
    if (folds.folds < 2) throw ConfigError("config: at least two folds are required");
    if (folds.val_fraction < 0 || folds.val_fraction >= 1) throw ConfigError("config: val_fraction must be in [0, 1)");
    for (const auto& [id, h] : homes) {
        if (h.synthetic()) {
            require_exists(*h.templ, "template for " + id);
            if (h.days < 1) throw ConfigError("config: home " + id + ": days must be positive");
            if (h.noise_rate < 0) throw ConfigError("config: home " + id + ": noise_rate must be non-negative");
        } else {
            require_exists(h.log, "log for " + id);
            require_exists(h.layout, "layout for " + id);
            require_exists(h.map, "activity map for " + id);
        }
        if (h.cache) require_exists(*h.cache, "augmentation cache for " + id);
    }
    if (embedding_sentences) require_exists(*embedding_sentences, "embedding sentences");
    if (embedding_matrix) require_exists(*embedding_matrix, "embedding matrix");
}

std::uint64_t ExperimentConfig::require_seed() const {
    if (!seed) throw ConfigError("config: seed is required");
    return *seed;
}

ExperimentConfig load_config(std::istream& in, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.base_dir = base_dir;
    try {
        if (doc.contains("seed") && !doc["seed"].is_null()) c.seed = doc["seed"].get<std::uint64_t>();
        c.source = doc.value("source", std::string{});
        c.targets = doc.value("targets", std::vector<std::string>{});
        c.variant = parse_variant(doc.value("variant", std::string("basic")));
        for (const auto& [id, h] : doc.at("homes").items()) {
            HomeSource src;
            if (h.contains("template")) {
                src.templ = resolve(base_dir, h["template"].get<std::string>());
                src.days = h.value("days", 7);
                src.noise_rate = h.value("noise_rate", 0.0);
                src.salt = h.value("salt", std::uint64_t{1});
            } else {
                src.log = resolve(base_dir, h.at("log").get<std::string>());
                src.layout = resolve(base_dir, h.at("layout").get<std::string>());
                src.map = resolve(base_dir, h.at("map").get<std::string>());
            }
            if (h.contains("cache") && !h["cache"].is_null())
                src.cache = resolve(base_dir, h["cache"].get<std::string>());
            c.homes.emplace(id, std::move(src));
        }
        if (doc.contains("embedding")) {
            const auto& e = doc["embedding"];
            c.embedding.provider = parse_provider(e.value("provider", std::string("hash")));
            c.embedding.dimension = e.value("dimension", std::size_t{768});
            if (e.contains("model_name") && !e["model_name"].is_null())
                c.embedding.model_name = e["model_name"].get<std::string>();
            c.embedding.seed = e.value("seed", std::uint64_t{0});
            if (e.contains("sentences")) c.embedding_sentences = resolve(base_dir, e["sentences"].get<std::string>());
            if (e.contains("matrix")) c.embedding_matrix = resolve(base_dir, e["matrix"].get<std::string>());
        }
        c.classifier = parse_classifier(doc.value("classifier", std::string("bilstm")));
        if (doc.contains("trainer_command") && !doc["trainer_command"].is_null())
            c.trainer_command = doc["trainer_command"].get<std::string>();
        c.features_only = doc.value("features_only", !c.trainer_command.has_value());
        c.within_home = doc.value("within_home", false);
        if (doc.contains("windows")) {
            const auto& w = doc["windows"];
            c.windows.window_size = w.value("size", c.windows.window_size);
            c.windows.min_length = w.value("min_length", c.windows.min_length);
            c.windows.stride = w.value("stride", c.windows.stride);
        }
        if (doc.contains("folds")) {
            const auto& f = doc["folds"];
            c.folds.folds = f.value("count", c.folds.folds);
            c.folds.val_fraction = f.value("val_fraction", c.folds.val_fraction);
            c.folds.ungrouped_shuffle = f.value("ungrouped_shuffle", c.folds.ungrouped_shuffle);
        }
        c.render.placement = parse_placement(doc.value("temporal_placement", std::string("lag_first")));
        c.skip_unknown_sensors = doc.value("skip_unknown_sensors", false);
        c.lenient = doc.value("lenient", false);
        c.output_dir = resolve(base_dir, doc.value("output_dir", std::string("out")));
        if (doc.contains("llm")) {
            const auto& l = doc["llm"];
            c.llm.url = l.value("url", c.llm.url);
            c.llm.model = l.value("model", c.llm.model);
            c.llm.api_key_env = l.value("api_key_env", c.llm.api_key_env);
            c.llm.temperature = l.value("temperature", c.llm.temperature);
            c.llm.timeout_seconds = l.value("timeout_seconds", c.llm.timeout_seconds);
            c.augment.max_format_retries = l.value("max_format_retries", c.augment.max_format_retries);
            c.augment.max_in_flight = l.value("max_in_flight", c.augment.max_in_flight);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return load_config(in, base);
}

namespace {

// Moves annotations off events from sensors the layout does not know, then drops those events.
EventLog drop_unknown_sensors(const EventLog& log, const HomeLayout& layout) {
    EventLog out;
    out.home_id = log.home_id;
    std::optional<Annotation> pending_begin;
    for (const auto& ev : log.events) {
        if (!layout.find(ev.sensor_id)) {
            if (!ev.annotation) continue;
            if (ev.annotation->marker == Marker::Begin) {
                pending_begin = ev.annotation;
            } else if (!out.events.empty() && !out.events.back().annotation) {
                out.events.back().annotation = ev.annotation;
            } else {
                throw SegmentationError("cannot relocate end of '" + ev.annotation->activity +
                                        "' from unknown sensor " + ev.sensor_id);
            }
            continue;
        }
        out.events.push_back(ev);
        if (pending_begin) {
            if (out.events.back().annotation)
                throw SegmentationError("cannot relocate begin of '" + pending_begin->activity + "' onto " +
                                        ev.sensor_id);
            out.events.back().annotation = pending_begin;
            pending_begin.reset();
        }
    }
    return out;
}

std::string log_text(const EventLog& log) {
    std::ostringstream os;
    write_log(os, log);
    return os.str();
}

}  // namespace

HomeData load_home(const ExperimentConfig& config, const std::string& home_id) {
    auto it = config.homes.find(home_id);
    if (it == config.homes.end()) throw ConfigError("unknown home '" + home_id + "'");
    const auto& src = it->second;
    HomeData d;
    d.home_id = home_id;
    if (src.synthetic()) {
        const auto tmpl = synthetic::load_template_file(src.templ->string());
        synthetic::GenerationRecipe recipe;
        recipe.seed = derive_seed(config.require_seed(), src.salt);
        recipe.days = src.days;
        recipe.residents = tmpl.residents;
        recipe.noise_rate = src.noise_rate;
        auto bundle = synthetic::generate(tmpl, recipe);
        d.log = std::move(bundle.log);
        d.log.home_id = home_id;
        d.layout = std::move(bundle.layout);
        d.map = std::move(bundle.map);
        d.parse_summary.lines = d.parse_summary.events = d.log.events.size();
        d.input_hashes.emplace_back("template", sha256_file(src.templ->string()));
        d.input_hashes.emplace_back("log", sha256_hex(log_text(d.log)));
        d.input_hashes.emplace_back("layout", sha256_hex(serialize_layout(d.layout)));
        d.input_hashes.emplace_back("map", sha256_hex(serialize_activity_map(d.map)));
    } else {
        d.layout = load_layout_file(src.layout.string());
        d.map = load_activity_map_file(src.map.string());
        auto parsed = parse_log_file(src.log.string(), home_id, ParseOptions{config.lenient});
        d.log = std::move(parsed.log);
        d.parse_summary = parsed.summary;
        d.input_hashes.emplace_back("log", sha256_file(src.log.string()));
        d.input_hashes.emplace_back("layout", sha256_file(src.layout.string()));
        d.input_hashes.emplace_back("map", sha256_file(src.map.string()));
    }
    if (d.layout.home_id != home_id)
        throw ConfigError("layout home id '" + d.layout.home_id + "' does not match home '" + home_id + "'");
    if (d.map.home_id() != home_id)
        throw ConfigError("activity map home id '" + d.map.home_id() + "' does not match home '" + home_id + "'");
    if (src.cache) {
        d.cache = AugmentationCache::load_file(src.cache->string());
        d.input_hashes.emplace_back("cache", sha256_file(src.cache->string()));
    }
    if (config.skip_unknown_sensors) d.log = drop_unknown_sensors(d.log, d.layout);
    return d;
}

PreparedHome prepare_home(const ExperimentConfig& config, const std::string& home_id) {
    PreparedHome p;
    p.data = load_home(config, home_id);
    if (is_llm_variant(config.variant) && !p.data.cache)
        throw ConfigError("variant " + std::string(variant_name(config.variant)) + " needs an augmentation cache for " +
                          home_id);
    p.segmentation = segment(p.data.log, p.data.map, config.windows);
    auto windows = build_windows(p.data.log, p.segmentation, p.data.layout, config.variant,
                                 p.data.cache ? &*p.data.cache : nullptr, config.render);
    p.windows = is_llm_variant(config.variant) ? triplicate_llm(windows, config.variant) : std::move(windows);
    p.plan = make_folds(p.windows, config.require_seed(), config.folds);
    apply_folds(p.windows, p.plan);
    return p;
}

namespace {

ordered manifest_for(const ExperimentConfig& config, const PreparedHome& p, const std::string& dataset_sha,
                     std::size_t dataset_lines) {
    ordered m;
    m["format"] = "tdost-dataset/1";
    m["home"] = p.data.home_id;
    m["variant"] = std::string(variant_name(config.variant));
    m["seed"] = config.require_seed();
    ordered opts;
    opts["window_size"] = config.windows.window_size;
    opts["min_length"] = config.windows.min_length;
    opts["stride"] = config.windows.stride;
    opts["folds"] = config.folds.folds;
    opts["val_fraction"] = config.folds.val_fraction;
    opts["ungrouped_shuffle"] = config.folds.ungrouped_shuffle;
    opts["temporal_placement"] = std::string(placement_name(config.render.placement));
    opts["skip_unknown_sensors"] = config.skip_unknown_sensors;
    opts["lenient"] = config.lenient;
    m["options"] = opts;

    std::set<CommonActivity> present;
    for (const auto& w : p.windows) present.insert(w.label);
    ordered labels = ordered::array();
    for (auto a : present) labels.push_back(std::string(activity_name(a)));
    m["label_set"] = labels;

    const auto& src = config.homes.at(p.data.home_id);
    ordered inputs;
    for (const auto& [name, sha] : p.data.input_hashes) {
        ordered entry;
        if (src.synthetic()) {
            entry["path"] = name == "template" ? relative_name(config, *src.templ) : "generated";
        } else {
            const fs::path& path = name == "log" ? src.log : name == "layout" ? src.layout : name == "map" ? src.map : *src.cache;
            entry["path"] = relative_name(config, path);
        }
        if (name == "cache" && src.cache) entry["path"] = relative_name(config, *src.cache);
        entry["sha256"] = sha;
        inputs[name] = entry;
    }
    m["inputs"] = inputs;
    if (src.synthetic()) {
        ordered gen;
        gen["days"] = src.days;
        gen["noise_rate"] = src.noise_rate;
        gen["salt"] = src.salt;
        m["generator"] = gen;
    }

    ordered summary;
    summary["events"] = p.data.log.events.size();
    summary["non_monotone"] = p.data.parse_summary.non_monotone;
    summary["skipped_lines"] = p.data.parse_summary.skipped;
    summary["labeled_triggers"] = p.segmentation.labeled_triggers;
    summary["discarded_pieces"] = p.segmentation.discarded.pieces;
    summary["discarded_triggers"] = p.segmentation.discarded.triggers;
    summary["fold_warnings"] = p.plan.warnings;
    m["summary"] = summary;

    ordered emb;
    emb["provider"] = std::string(provider_name(config.embedding.provider));
    emb["dimension"] = config.embedding.dimension;
    emb["model_name"] = config.embedding.model_name ? ordered(*config.embedding.model_name) : ordered(nullptr);
    emb["seed"] = config.embedding.seed;
    m["embedding"] = emb;

    ordered ds;
    ds["path"] = "dataset.jsonl";
    ds["sha256"] = dataset_sha;
    ds["windows"] = dataset_lines;
    m["dataset"] = ds;
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

PreprocessResult export_prepared(const ExperimentConfig& config, const PreparedHome& p) {
    const fs::path dir = config.output_dir / p.data.home_id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

    std::ostringstream ds;
    write_windows_jsonl(ds, p.windows);
    const std::string dataset = ds.str();
    PreprocessResult r;
    r.dataset_path = dir / "dataset.jsonl";
    r.manifest_path = dir / "manifest.json";
    r.window_count = p.windows.size();
    r.dataset_sha256 = sha256_hex(dataset);
    const std::string manifest = manifest_for(config, p, r.dataset_sha256, r.window_count).dump(2) + "\n";
    r.manifest_sha256 = sha256_hex(manifest);
    write_text(r.dataset_path, dataset);
    write_text(r.manifest_path, manifest);
    return r;
}

}  // namespace

PreprocessResult run_preprocess(const ExperimentConfig& config, const std::string& home_id) {
    config.validate();
    return export_prepared(config, prepare_home(config, home_id));
}

double accuracy(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("accuracy: size mismatch");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double weighted_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("weighted_f1: size mismatch");
    if (truth.empty()) return 0.0;
    std::map<std::size_t, std::size_t> tp, support, predicted_count;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++support[truth[i]];
        ++predicted_count[predicted[i]];
        if (truth[i] == predicted[i]) ++tp[truth[i]];
    }
    double total = 0;
    for (const auto& [cls, n] : support) {
        const double t = static_cast<double>(tp[cls]);
        const double denom = static_cast<double>(n + predicted_count[cls]);
        const double f1 = denom > 0 ? 2.0 * t / denom : 0.0;
        total += f1 * static_cast<double>(n);
    }
    return total / static_cast<double>(truth.size());
}

std::vector<std::vector<double>> pooled_features(std::span<const EmbeddedWindow> windows) {
    std::vector<std::vector<double>> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        std::vector<double> v(w.cols, 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            auto row = w.row(r);
            for (std::size_t c = 0; c < w.cols; ++c) v[c] += row[c];
        }
        double norm = 0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

void NearestCentroid::fit(const std::vector<std::vector<double>>& features, const std::vector<std::size_t>& labels) {
    if (features.size() != labels.size()) throw std::invalid_argument("fit: size mismatch");
    centroids_.clear();
    for (std::size_t i = 0; i < features.size(); ++i) {
        auto& c = centroids_[labels[i]];
        if (c.empty()) c.assign(features[i].size(), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += features[i][k];
    }
    for (auto& [label, c] : centroids_) {
        double norm = 0;
        for (double x : c) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0)
            for (double& x : c) x /= norm;
    }
    ++updates_;
}

std::size_t NearestCentroid::predict(const std::vector<double>& feature) const {
    if (centroids_.empty()) throw std::logic_error("predict before fit");
    std::size_t best = centroids_.begin()->first;
    double best_score = -2.0;
    for (const auto& [label, c] : centroids_) {
        double dot = 0;
        for (std::size_t k = 0; k < c.size(); ++k) dot += c[k] * feature[k];
        if (dot > best_score) {
            best_score = dot;
            best = label;
        }
    }
    return best;
}

std::vector<TdostWindow> id_token_windows(std::span<const TdostWindow> windows, const EventLog& log) {
    std::vector<TdostWindow> out(windows.begin(), windows.end());
    for (auto& w : out) {
        for (auto& t : w.triggers) {
            const auto& ev = log.events.at(t.source_event_index);
            t.sentences = {ev.sensor_id + "_" + ev.value.normalized};
        }
    }
    return out;
}

namespace {

struct Featurized {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
};

std::unique_ptr<SentenceEmbedder> make_embedder(const ExperimentConfig& config) {
    if (config.embedding.provider == EmbeddingProvider::Hash)
        return std::make_unique<HashEmbedder>(config.embedding.dimension, config.embedding.seed);
    std::ifstream sin(*config.embedding_sentences);
    if (!sin) throw EmbeddingError("cannot open " + config.embedding_sentences->string());
    std::ifstream min(*config.embedding_matrix, std::ios::binary);
    if (!min) throw EmbeddingError("cannot open " + config.embedding_matrix->string());
    return std::make_unique<MatrixFileEmbedder>(read_sentences_jsonl(sin), read_matrix(min));
}

Featurized featurize(const ExperimentConfig& config, const PreparedHome& p, const SentenceEmbedder& embedder,
                     const std::set<CommonActivity>& keep) {
    std::vector<TdostWindow> selected;
    for (const auto& w : p.windows)
        if (keep.count(w.label)) selected.push_back(w);
    if (config.classifier == ClassifierKind::BaselineIds) selected = id_token_windows(selected, p.data.log);
    const auto embedded = embed_windows(selected, embedder, config.embedding);
    Featurized f;
    f.features = pooled_features(embedded);
    for (std::size_t i = 0; i < selected.size(); ++i) {
        f.ids.push_back(selected[i].window_id);
        f.labels.push_back(embedded[i].label_index);
    }
    return f;
}

void summarize(TransferResult& r) {
    const double n = static_cast<double>(r.folds.size());
    if (r.folds.empty()) return;
    double acc = 0, wf1 = 0;
    for (const auto& f : r.folds) {
        acc += f.accuracy;
        wf1 += f.weighted_f1;
    }
    r.accuracy_mean = acc / n;
    r.wf1_mean = wf1 / n;
    if (r.folds.size() >= 2) {
        double va = 0, vf = 0;
        for (const auto& f : r.folds) {
            va += (f.accuracy - r.accuracy_mean) * (f.accuracy - r.accuracy_mean);
            vf += (f.weighted_f1 - r.wf1_mean) * (f.weighted_f1 - r.wf1_mean);
        }
        r.accuracy_std = std::sqrt(va / n);
        r.wf1_std = std::sqrt(vf / n);
    }
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
}

void run_trainer(const ExperimentConfig& config, const PreprocessResult& src, const PreprocessResult& tgt,
                 const std::vector<CommonActivity>& labels, const fs::path& metrics_path, TransferResult& r) {
    std::string labels_arg;
    for (auto a : labels) {
        if (!labels_arg.empty()) labels_arg += ",";
        labels_arg += std::string(activity_name(a));
    }
    std::string cmd = *config.trainer_command;
    replace_all(cmd, "{source_dataset}", shell_quote(src.dataset_path.string()));
    replace_all(cmd, "{source_manifest}", shell_quote(src.manifest_path.string()));
    replace_all(cmd, "{target_dataset}", shell_quote(tgt.dataset_path.string()));
    replace_all(cmd, "{target_manifest}", shell_quote(tgt.manifest_path.string()));
    replace_all(cmd, "{metrics}", shell_quote(metrics_path.string()));
    replace_all(cmd, "{classifier}", shell_quote(std::string(classifier_name(config.classifier))));
    replace_all(cmd, "{labels}", shell_quote(labels_arg));
    std::error_code ec;
    fs::remove(metrics_path, ec);
    const int status = std::system(cmd.c_str());
    if (status != 0) throw ExternalError("trainer command failed with status " + std::to_string(status));

    std::ifstream in(metrics_path);
    if (!in) throw ExternalError("trainer wrote no metrics to " + metrics_path.string());
    try {
        const auto m = json::parse(in);
        r.classifier = m.at("classifier").get<std::string>();
        r.encoder = m.at("encoder").get<std::string>();
        for (const auto& f : m.at("folds")) {
            FoldMetrics fm;
            fm.accuracy = f.at("acc").get<double>();
            fm.weighted_f1 = f.at("wf1").get<double>();
            if (fm.accuracy < 0 || fm.accuracy > 1 || fm.weighted_f1 < 0 || fm.weighted_f1 > 1)
                throw ExternalError("trainer metrics out of range");
            r.folds.push_back(fm);
        }
    } catch (const json::exception& e) {
        throw ExternalError(std::string("trainer metrics do not match the handshake schema: ") + e.what());
    }
    if (r.folds.empty()) throw ExternalError("trainer metrics list no folds");
}

}  // namespace

ExperimentReport run_transfer(const ExperimentConfig& input) {
    input.validate();
    ExperimentConfig config = input;
    // The raw-ID baseline ignores sentences, so it is prepared from the basic variant.
    if (config.features_only && config.classifier == ClassifierKind::BaselineIds) config.variant = TdostVariant::Basic;

    ExperimentReport report;
    report.seed = config.require_seed();
    const PreparedHome source = prepare_home(config, config.source);
    const PreprocessResult source_export = export_prepared(config, source);

    std::vector<std::string> targets = config.targets;
    if (config.within_home) targets.insert(targets.begin(), config.source);
    if (targets.empty()) throw ConfigError("config: no target homes");

    std::unique_ptr<SentenceEmbedder> embedder;
    if (config.features_only) embedder = make_embedder(config);

    for (const auto& target_id : targets) {
        const bool within = target_id == config.source;
        std::optional<PreparedHome> target_storage;
        if (!within) target_storage = prepare_home(config, target_id);
        const PreparedHome& target = within ? source : *target_storage;
        const PreprocessResult target_export = within ? source_export : export_prepared(config, target);

        TransferResult r;
        r.source = config.source;
        r.target = target_id;
        r.variant = config.features_only && config.classifier == ClassifierKind::BaselineIds
                        ? "raw_ids"
                        : std::string(variant_name(config.variant));
        r.label_set = common_label_set(source.data.map, target.data.map);
        r.source_manifest_sha256 = source_export.manifest_sha256;
        r.target_manifest_sha256 = target_export.manifest_sha256;
        const std::set<CommonActivity> keep(r.label_set.begin(), r.label_set.end());

        for (const auto& w : target.windows) {
            if (keep.count(w.label) && w.fold_assignment) {
                ++r.class_counts[std::string(activity_name(w.label))];
            }
        }

        if (!config.features_only) {
            run_trainer(config, source_export, target_export, r.label_set,
                        config.output_dir / (config.source + "__" + target_id + ".metrics.json"), r);
        } else {
            r.classifier = "nearest_centroid";
            r.encoder = config.embedding.provider == EmbeddingProvider::Hash
                            ? "hash"
                            : config.embedding.model_name.value_or("external");
            const auto src = featurize(config, source, *embedder, keep);
            const auto tgt = within ? src : featurize(config, target, *embedder, keep);
            std::map<std::string, std::size_t> src_index, tgt_index;
            for (std::size_t i = 0; i < src.ids.size(); ++i) src_index[src.ids[i]] = i;
            for (std::size_t i = 0; i < tgt.ids.size(); ++i) tgt_index[tgt.ids[i]] = i;

            for (int f = 0; f < config.folds.folds; ++f) {
                const auto source_view = source.plan.view(f);
                std::vector<std::vector<double>> train_x;
                std::vector<std::size_t> train_y;
                for (const auto& id : source_view.train) {
                    auto it = src_index.find(id);
                    if (it == src_index.end()) continue;
                    train_x.push_back(src.features[it->second]);
                    train_y.push_back(src.labels[it->second]);
                }
                if (train_x.empty()) throw DataError("fold " + std::to_string(f) + " has no source training windows");
                NearestCentroid model;
                model.fit(train_x, train_y);
                const std::size_t updates_before = model.updates();

                std::vector<std::size_t> truth, predicted;
                for (const auto& id : target.plan.view(f).test) {
                    auto it = tgt_index.find(id);
                    if (it == tgt_index.end()) continue;
                    truth.push_back(tgt.labels[it->second]);
                    predicted.push_back(model.predict(tgt.features[it->second]));
                }
                r.target_updates += model.updates() - updates_before;
                r.folds.push_back({accuracy(truth, predicted), weighted_f1(truth, predicted), truth.size()});
            }
        }
        summarize(r);
        report.results.push_back(std::move(r));
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    ordered doc;
    doc["seed"] = report.seed;
    ordered results = ordered::array();
    for (const auto& r : report.results) {
        ordered e;
        e["source"] = r.source;
        e["target"] = r.target;
        e["variant"] = r.variant;
        e["classifier"] = r.classifier;
        e["encoder"] = r.encoder;
        ordered labels = ordered::array();
        for (auto a : r.label_set) labels.push_back(std::string(activity_name(a)));
        e["label_set"] = labels;
        ordered folds = ordered::array();
        for (const auto& f : r.folds) folds.push_back({{"acc", f.accuracy}, {"wf1", f.weighted_f1}, {"n", f.test_windows}});
        e["folds"] = folds;
        e["acc_mean"] = r.accuracy_mean;
        if (r.accuracy_std) e["acc_std"] = *r.accuracy_std;
        e["wf1_mean"] = r.wf1_mean;
        if (r.wf1_std) e["wf1_std"] = *r.wf1_std;
        ordered counts;
        for (const auto& [label, n] : r.class_counts) counts[label] = n;
        e["class_counts"] = counts;
        e["source_manifest_sha256"] = r.source_manifest_sha256;
        e["target_manifest_sha256"] = r.target_manifest_sha256;
        e["target_updates"] = r.target_updates;
        results.push_back(e);
    }
    doc["results"] = results;
    return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::istream& in) {
    ExperimentReport report;
    try {
        const auto doc = json::parse(in);
        report.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& e : doc.at("results")) {
            TransferResult r;
            r.source = e.at("source").get<std::string>();
            r.target = e.at("target").get<std::string>();
            r.variant = e.at("variant").get<std::string>();
            r.classifier = e.value("classifier", std::string{});
            r.encoder = e.value("encoder", std::string{});
            for (const auto& l : e.value("label_set", json::array())) {
                auto a = parse_common_activity(l.get<std::string>());
                if (!a) throw DataError("report: unknown label " + l.get<std::string>());
                r.label_set.push_back(*a);
            }
            for (const auto& f : e.at("folds"))
                r.folds.push_back({f.at("acc").get<double>(), f.at("wf1").get<double>(), f.value("n", std::size_t{0})});
            r.accuracy_mean = e.at("acc_mean").get<double>();
            r.wf1_mean = e.at("wf1_mean").get<double>();
            if (e.contains("acc_std")) r.accuracy_std = e["acc_std"].get<double>();
            if (e.contains("wf1_std")) r.wf1_std = e["wf1_std"].get<double>();
            const json counts = e.value("class_counts", json::object());
            for (const auto& [label, n] : counts.items()) r.class_counts[label] = n.get<std::size_t>();
            r.source_manifest_sha256 = e.value("source_manifest_sha256", std::string{});
            r.target_manifest_sha256 = e.value("target_manifest_sha256", std::string{});
            r.target_updates = e.value("target_updates", std::size_t{0});
            report.results.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("report: ") + e.what());
    }
    return report;
}

namespace {

std::string percent(double mean, const std::optional<double>& sd) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << mean * 100.0;
    if (sd) os << " ± " << std::setprecision(2) << *sd * 100.0;
    return os.str();
}

// Display width: counts UTF-8 code points so "±" takes one column.
std::size_t width_of(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

}  // namespace

std::string format_report_table(const ExperimentReport& report) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"source", "target", "variant", "classifier", "folds", "accuracy %", "weighted F1 %"});
    for (const auto& r : report.results)
        rows.push_back({r.source, r.target, r.variant, r.classifier, std::to_string(r.folds.size()),
                        percent(r.accuracy_mean, r.accuracy_std), percent(r.wf1_mean, r.wf1_std)});
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width_of(row[c]));
    std::ostringstream os;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            if (c) os << "  ";
            const auto pad = widths[c] - width_of(rows[i][c]);
            const bool numeric = c >= 4;
            if (numeric) os << std::string(pad, ' ');
            os << rows[i][c];
            if (!numeric && c + 1 < rows[i].size()) os << std::string(pad, ' ');
        }
        os << "\n";
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : widths) total += w;
            os << std::string(total + 2 * (widths.size() - 1), '-') << "\n";
        }
    }
    return os.str();
}

}  // namespace tdost
