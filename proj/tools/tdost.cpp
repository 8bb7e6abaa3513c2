// tdost: command-line front end for the TDOST pipeline.
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdost/chat_client.hpp"
#include "tdost/error.hpp"
#include "tdost/harness.hpp"
#include "tdost/synthetic_home.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitExternal = 4;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string variant;
    std::string source;
    std::vector<std::string> targets;
    std::string output_dir;
    std::string classifier;
    bool ungrouped_shuffle = false;
    bool skip_unknown = false;
    bool lenient = false;
    bool features_only = false;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override the config seed");
    cmd->add_option("--variant", o.variant, "basic | temporal | llm | llm_temporal");
    cmd->add_option("--output-dir", o.output_dir, "Override the output directory");
    cmd->add_flag("--ungrouped-shuffle,--paper-shuffle", o.ungrouped_shuffle, "Shuffle triplicated windows into folds independently");
    cmd->add_flag("--skip-unknown-sensors", o.skip_unknown, "Drop events from sensors missing in the layout");
    cmd->add_flag("--lenient", o.lenient, "Skip malformed log lines instead of failing");
}

tdost::ExperimentConfig load(const Overrides& o) {
    auto c = tdost::load_config_file(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (!o.variant.empty()) c.variant = tdost::parse_variant(o.variant);
    if (!o.source.empty()) c.source = o.source;
    if (!o.targets.empty()) c.targets = o.targets;
    if (!o.output_dir.empty()) c.output_dir = o.output_dir;
    if (!o.classifier.empty()) c.classifier = tdost::parse_classifier(o.classifier);
    if (o.ungrouped_shuffle) c.folds.ungrouped_shuffle = true;
    if (o.skip_unknown) c.skip_unknown_sensors = true;
    if (o.lenient) c.lenient = true;
    if (o.features_only) c.features_only = true;
    c.require_seed();
    return c;
}

std::string home_or_source(const std::string& home, const tdost::ExperimentConfig& c) {
    return home.empty() ? c.source : home;
}

std::string today() {
    const auto now = std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now());
    const std::chrono::year_month_day ymd{now};
    std::ostringstream os;
    os << static_cast<int>(ymd.year()) << '-' << std::setw(2) << std::setfill('0') << static_cast<unsigned>(ymd.month())
       << '-' << std::setw(2) << static_cast<unsigned>(ymd.day());
    return os.str();
}

int cmd_parse(const std::string& log, const std::string& home, bool lenient, const std::string& out) {
    auto parsed = tdost::parse_log_file(log, home, tdost::ParseOptions{lenient});
    std::cout << parsed.summary.to_json() << "\n";
    for (const auto& reason : parsed.skipped_reasons) std::cerr << "skipped: " << reason << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw tdost::DataError("cannot write " + out);
        tdost::write_log(f, parsed.log);
    }
    return 0;
}

int cmd_layout_check(const std::string& layout_path, const std::string& log_path, const std::string& map_path) {
    const auto layout = tdost::load_layout_file(layout_path);
    std::size_t by_type[6] = {};
    for (const auto& [id, meta] : layout.sensors) ++by_type[static_cast<int>(meta.sensor_type)];
    std::cout << layout.home_id << ": " << layout.sensors.size() << " sensors";
    for (int t = 0; t < 6; ++t)
        if (by_type[t])
            std::cout << ", " << by_type[t] << " " << tdost::sensor_type_name(static_cast<tdost::SensorType>(t));
    std::cout << (layout.experimental ? " (experimental)" : "") << "\n";

    int status = 0;
    if (!log_path.empty()) {
        const auto parsed = tdost::parse_log_file(log_path, layout.home_id);
        std::map<std::string, std::size_t> unknown;
        for (const auto& ev : parsed.log.events)
            if (!layout.find(ev.sensor_id)) ++unknown[ev.sensor_id];
        for (const auto& [id, n] : unknown) std::cout << "unresolved sensor " << id << " (" << n << " events)\n";
        if (!unknown.empty()) status = kExitData;
    }
    if (!map_path.empty()) {
        const auto map = tdost::load_activity_map_file(map_path);
        std::cout << "activity map: " << map.entries().size() << " labels ->";
        for (auto a : map.image()) std::cout << " [" << tdost::activity_name(a) << "]";
        std::cout << "\n";
        if (!log_path.empty()) {
            const auto parsed = tdost::parse_log_file(log_path, layout.home_id);
            for (const auto& ev : parsed.log.events) {
                if (ev.annotation && !map.try_translate(ev.annotation->activity)) {
                    std::cout << "unmapped label " << ev.annotation->activity << "\n";
                    status = kExitData;
                }
            }
        }
    }
    return status;
}

int cmd_render(const Overrides& o, const std::string& home, const std::string& out) {
    const auto config = load(o);
    const auto prepared = tdost::prepare_home(config, home_or_source(home, config));
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw tdost::DataError("cannot write " + out);
    }
    std::ostream& os = out.empty() ? std::cout : file;
    for (const auto& w : prepared.windows)
        for (const auto& t : w.triggers)
            for (const auto& s : t.sentences) os << w.window_id << '\t' << s << '\n';
    return 0;
}

int cmd_augment(const Overrides& o, const std::string& home_arg, const std::string& mode, const std::string& cache_arg,
                const std::string& api_url) {
    auto config = load(o);
    const std::string home = home_or_source(home_arg, config);
    auto it = config.homes.find(home);
    if (it == config.homes.end()) throw tdost::ConfigError("unknown home '" + home + "'");
    fs::path cache_path = cache_arg.empty() ? it->second.cache.value_or(fs::path{}) : fs::path(cache_arg);
    if (cache_path.empty()) throw tdost::ConfigError("no augmentation cache path for " + home + " (use --cache)");
    it->second.cache.reset();
    const auto data = tdost::load_home(config, home);

    auto cache = fs::exists(cache_path) ? tdost::AugmentationCache::load_file(cache_path.string()) : tdost::AugmentationCache{};
    const auto keys = tdost::collect_trigger_keys(data.log, data.layout, config.skip_unknown_sensors);
    tdost::AugmentOptions options = config.augment;
    options.mode = mode == "live" ? tdost::AugmentMode::Live : tdost::AugmentMode::Offline;
    options.retrieved_date = today();
    std::unique_ptr<tdost::ChatClient> client;
    if (options.mode == tdost::AugmentMode::Live) {
        auto endpoint = config.llm;
        if (!api_url.empty()) endpoint.url = api_url;
        if (endpoint.url.empty()) throw tdost::ConfigError("live augmentation needs llm.url in the config or --url");
        client = std::make_unique<tdost::HttpChatClient>(endpoint);
    }
    const auto stats = tdost::augment(keys, cache, client.get(), options);
    if (stats.new_entries > 0) cache.save_file(cache_path.string());
    std::cout << "keys " << stats.distinct_keys << ", cached " << stats.cache_hits << ", prompts "
              << stats.prompts_issued << ", new " << stats.new_entries << ", format retries " << stats.format_retries
              << "\n";
    return 0;
}

int cmd_windows(const Overrides& o, const std::string& home) {
    const auto config = load(o);
    const auto p = tdost::prepare_home(config, home_or_source(home, config));
    std::map<std::string, std::vector<std::size_t>> per_class;
    for (const auto& w : p.windows) {
        auto& counts = per_class[std::string(tdost::activity_name(w.label))];
        counts.resize(static_cast<std::size_t>(config.folds.folds));
        ++counts[static_cast<std::size_t>(w.fold_assignment->fold)];
    }
    std::cout << p.data.home_id << ": " << p.windows.size() << " windows from " << p.segmentation.labeled_triggers
              << " labeled triggers; discarded " << p.segmentation.discarded.pieces << " pieces ("
              << p.segmentation.discarded.triggers << " triggers)\n";
    for (const auto& [label, counts] : per_class) {
        std::cout << "  " << std::left << std::setw(18) << label;
        for (auto n : counts) std::cout << std::right << std::setw(6) << n;
        std::cout << "\n";
    }
    for (int f = 0; f < config.folds.folds; ++f) {
        const auto v = p.plan.view(f);
        std::cout << "  fold " << f << ": train " << v.train.size() << ", val " << v.val.size() << ", test "
                  << v.test.size() << "\n";
    }
    for (const auto& w : p.plan.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_export(const Overrides& o, const std::string& home) {
    const auto config = load(o);
    const auto r = tdost::run_preprocess(config, home_or_source(home, config));
    std::cout << r.dataset_path.string() << "  " << r.window_count << " windows  sha256 " << r.dataset_sha256 << "\n"
              << r.manifest_path.string() << "  sha256 " << r.manifest_sha256 << "\n";
    return 0;
}

int cmd_transfer(const Overrides& o, const std::string& out) {
    const auto config = load(o);
    const auto report = tdost::run_transfer(config);
    const fs::path path = out.empty() ? config.output_dir / "report.json" : fs::path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw tdost::DataError("cannot write " + path.string());
    f << tdost::report_to_json(report);
    std::cout << tdost::format_report_table(report) << "report: " << path.string() << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, bool as_json) {
    tdost::ExperimentReport merged;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw tdost::DataError("cannot open " + path);
        auto r = tdost::report_from_json(in);
        merged.seed = r.seed;
        for (auto& row : r.results) merged.results.push_back(std::move(row));
    }
    std::cout << (as_json ? tdost::report_to_json(merged) : tdost::format_report_table(merged));
    return 0;
}

int cmd_generate(const std::string& templ, std::uint64_t seed, int days, double noise, const std::string& out_dir) {
    const auto t = tdost::synthetic::load_template_file(templ);
    tdost::synthetic::GenerationRecipe recipe;
    recipe.seed = seed;
    recipe.days = days;
    recipe.residents = t.residents;
    recipe.noise_rate = noise;
    const auto bundle = tdost::synthetic::generate(t, recipe);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
        std::ofstream f(dir / (t.home_id + ".log"));
        tdost::write_log(f, bundle.log);
    }
    std::ofstream(dir / (t.home_id + ".layout.json")) << tdost::serialize_layout(bundle.layout) << "\n";
    std::ofstream(dir / (t.home_id + ".map.json")) << tdost::serialize_activity_map(bundle.map) << "\n";
    std::cout << t.home_id << ": " << bundle.log.events.size() << " events, " << bundle.layout.sensors.size()
              << " sensors -> " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdost: textual descriptions of smart-home sensor triggers"};
    app.require_subcommand(1);

    std::string log, home, out, layout, map, mode = "offline", cache, url, templ, out_dir;
    bool lenient = false, as_json = false;
    std::vector<std::string> inputs;
    std::uint64_t gen_seed = 1;
    int days = 7;
    double noise = 0.0;
    Overrides o;

    auto* parse = app.add_subcommand("parse", "Parse a sensor log and print a summary");
    parse->add_option("--log", log, "Sensor log")->required()->check(CLI::ExistingFile);
    parse->add_option("--home", home, "Home id")->required();
    parse->add_flag("--lenient", lenient, "Skip malformed lines");
    parse->add_option("--out", out, "Write the normalized log here");

    auto* layout_check = app.add_subcommand("layout-check", "Validate a layout, optionally against a log and map");
    layout_check->add_option("--layout", layout, "Layout JSON")->required()->check(CLI::ExistingFile);
    layout_check->add_option("--log", log, "Sensor log to resolve")->check(CLI::ExistingFile);
    layout_check->add_option("--map", map, "Activity map JSON")->check(CLI::ExistingFile);

    auto* render = app.add_subcommand("render", "Print the TDOST sentences of every window");
    add_config_flags(render, o);
    render->add_option("--home", home, "Home id (default: config source)");
    render->add_option("--out", out, "Write to a file instead of stdout");

    auto* augment = app.add_subcommand("augment", "Fill or check the LLM augmentation cache");
    add_config_flags(augment, o);
    augment->add_option("--home", home, "Home id (default: config source)");
    augment->add_option("--mode", mode, "live | offline")->check(CLI::IsMember({"live", "offline"}));
    augment->add_option("--cache", cache, "Cache JSONL (default: the home's cache in the config)");
    augment->add_option("--url", url, "Chat-completion endpoint (overrides llm.url)");

    auto* windows = app.add_subcommand("windows", "Summarize windows and folds");
    add_config_flags(windows, o);
    windows->add_option("--home", home, "Home id (default: config source)");

    auto* export_cmd = app.add_subcommand("export", "Write dataset.jsonl and manifest.json");
    add_config_flags(export_cmd, o);
    export_cmd->add_option("--home", home, "Home id (default: config source)");

    auto* transfer = app.add_subcommand("transfer", "Train on the source home, evaluate frozen on the targets");
    add_config_flags(transfer, o);
    transfer->add_option("--source", o.source, "Override the source home");
    transfer->add_option("--target", o.targets, "Override the target homes");
    transfer->add_option("--classifier", o.classifier, "bilstm | convbilstm | baseline_ids");
    transfer->add_flag("--features-only", o.features_only, "Nearest-centroid over hash embeddings, no trainer");
    transfer->add_option("--out", out, "Report JSON path (default: <output_dir>/report.json)");

    auto* report = app.add_subcommand("report", "Print one or more report JSON files as a table");
    report->add_option("inputs", inputs, "Report JSON files")->required()->check(CLI::ExistingFile);
    report->add_flag("--json", as_json, "Print merged JSON instead of a table");

    auto* generate = app.add_subcommand("generate", "Write a synthetic home's log, layout and map");
    generate->add_option("--template", templ, "Home template JSON")->required()->check(CLI::ExistingFile);
    generate->add_option("--seed", gen_seed, "Generator seed")->required();
    generate->add_option("--days", days, "Days to simulate")->check(CLI::PositiveNumber);
    generate->add_option("--noise-rate", noise, "Spurious triggers per hour")->check(CLI::NonNegativeNumber);
    generate->add_option("--out-dir", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*parse) return cmd_parse(log, home, lenient, out);
        if (*layout_check) return cmd_layout_check(layout, log, map);
        if (*render) return cmd_render(o, home, out);
        if (*augment) return cmd_augment(o, home, mode, cache, url);
        if (*windows) return cmd_windows(o, home);
        if (*export_cmd) return cmd_export(o, home);
        if (*transfer) return cmd_transfer(o, out);
        if (*report) return cmd_report(inputs, as_json);
        if (*generate) return cmd_generate(templ, gen_seed, days, noise, out_dir);
    } catch (const tdost::Error& e) {
        std::cerr << "tdost: " << e.what() << "\n";
        switch (e.kind()) {
            case tdost::ErrorKind::Config: return kExitConfig;
            case tdost::ErrorKind::Data: return kExitData;
            case tdost::ErrorKind::External: return kExitExternal;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "tdost: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "tdost: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
