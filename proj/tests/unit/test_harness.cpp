#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tdost/error.hpp"
#include "tdost/harness.hpp"
#include "tdost/rng.hpp"
#include "tdost/sha256.hpp"

using namespace tdost;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = support::data_path("configs");

/// Synthetic pair config; `extra` is spliced into the top-level object.
std::string synthetic_config(const fs::path& out, const std::string& extra = "", int days = 2) {
    const std::string d = std::to_string(days);
    return R"({"seed": 1, "source": "home_a", "targets": ["home_b"], "variant": "basic",
      "homes": {"home_a": {"template": "../templates/home_a.json", "days": )" + d + R"(, "salt": 1},
                "home_b": {"template": "../templates/home_b.json", "days": )" + d + R"(, "salt": 2}},
      "embedding": {"provider": "hash", "dimension": 256},
      "output_dir": ")" + out.string() + "\"" + extra + "}";
}

ExperimentConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return load_config(in, kConfigDir);
}

std::string fake_trainer(const std::string& mode) {
    return std::string(TDOST_PYTHON) + " " + support::support_path("fake_trainer.py") + " " + mode +
           " {source_dataset} {source_manifest} {target_dataset} {target_manifest} {metrics} {classifier} {labels}";
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("config validation") {
    const auto out = support::scratch_dir("config");
    CHECK_NOTHROW(config_from(synthetic_config(out)).validate());
    CHECK(config_from(synthetic_config(out)).features_only);

    auto no_seed = config_from(std::regex_replace(synthetic_config(out), std::regex("\"seed\": 1,"), ""));
    CHECK_THROWS_AS(no_seed.validate(), ConfigError);
    CHECK_THROWS_AS(no_seed.require_seed(), ConfigError);
    CHECK_THROWS_AS(run_preprocess(no_seed, "home_a"), ConfigError);

    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "targets": ["home_a"])")).validate(), ConfigError);
    auto self = config_from(synthetic_config(out));
    self.targets = {"home_a"};
    CHECK_THROWS_AS(self.validate(), ConfigError);
    self.targets = {"home_c"};
    CHECK_THROWS_AS(self.validate(), ConfigError);
    self.targets = {"home_b", "home_b"};
    CHECK_THROWS_AS(self.validate(), ConfigError);

    auto missing = config_from(std::regex_replace(synthetic_config(out), std::regex("home_b.json"), "nowhere.json"));
    CHECK_THROWS_AS(missing.validate(), ConfigError);

    CHECK_THROWS_AS(config_from(std::regex_replace(synthetic_config(out), std::regex("\"basic\""), "\"fancy\"")), ConfigError);
    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "classifier": "svm")")), ConfigError);
    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "temporal_placement": "middle")")), ConfigError);
    CHECK_THROWS_AS(config_from("{not json"), ConfigError);
    CHECK_THROWS_AS(config_from(R"({"seed": 1})"), ConfigError);
    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "features_only": false)")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "folds": {"count": 1})")).validate(), ConfigError);
    CHECK_THROWS_AS(config_from(synthetic_config(out, R"(, "embedding": {"provider": "external", "dimension": 768})")).validate(),
                    ConfigError);

    auto llm = config_from(synthetic_config(out, R"(, "variant": "llm")"));
    CHECK_THROWS_AS(prepare_home(llm, "home_a"), ConfigError);
    CHECK_THROWS_AS(load_config_file(out / "absent.json"), ConfigError);

    const auto shipped = load_config_file(kConfigDir / "synthetic_transfer.json");
    CHECK_NOTHROW(shipped.validate());
    CHECK(shipped.within_home);
    CHECK(shipped.seed == 1u);
}

TEST_CASE("preprocess writes one JSONL line per window and a manifest") {
    const auto out = support::scratch_dir("preprocess");
    const auto config = config_from(synthetic_config(out));
    const auto r = run_preprocess(config, "home_a");
    CHECK(r.dataset_path == out / "home_a" / "dataset.jsonl");
    const auto dataset = support::read_file(r.dataset_path);
    CHECK(line_count(dataset) == r.window_count);
    CHECK(r.window_count > 10);

    const auto manifest = nlohmann::json::parse(support::read_file(r.manifest_path));
    CHECK(manifest["format"] == "tdost-dataset/1");
    CHECK(manifest["home"] == "home_a");
    CHECK(manifest["seed"] == 1);
    CHECK(manifest["dataset"]["sha256"] == r.dataset_sha256);
    CHECK(manifest["dataset"]["windows"] == r.window_count);
    CHECK(manifest["inputs"]["template"]["path"] == "../templates/home_a.json");
    CHECK(manifest["inputs"]["template"]["sha256"].get<std::string>().size() == 64);
    CHECK(manifest["embedding"]["dimension"] == 256);
    CHECK(manifest["summary"]["events"].get<std::size_t>() > 0);

    std::ifstream in(r.dataset_path);
    const auto windows = read_windows_jsonl(in);
    REQUIRE(windows.size() == r.window_count);
    for (const auto& w : windows) {
        CHECK(w.triggers.size() <= 100);
        REQUIRE(w.fold_assignment);
        CHECK(w.fold_assignment->split != Split::Test);
    }
}

TEST_CASE("preprocess is deterministic") {
    const auto out1 = support::scratch_dir("determinism-1");
    const auto out2 = support::scratch_dir("determinism-2");
    const auto a = run_preprocess(config_from(synthetic_config(out1)), "home_b");
    const auto b = run_preprocess(config_from(synthetic_config(out2)), "home_b");
    CHECK(a.dataset_sha256 == b.dataset_sha256);
    CHECK(a.manifest_sha256 == b.manifest_sha256);
    CHECK(support::read_file(a.dataset_path) == support::read_file(b.dataset_path));
    CHECK(support::read_file(a.manifest_path) == support::read_file(b.manifest_path));

    const auto c = run_preprocess(config_from(std::regex_replace(synthetic_config(out1), std::regex("\"seed\": 1"), "\"seed\": 2")),
                                  "home_b");
    CHECK(c.dataset_sha256 != a.dataset_sha256);
}

TEST_CASE("homes from recorded files") {
    const auto dir = support::scratch_dir("files");
    const auto [a, b] = support::synthetic_pair(4, 2);
    {
        std::ofstream log(dir / "a.log");
        write_log(log, a.log);
        std::ofstream layout(dir / "a_layout.json");
        layout << serialize_layout(a.layout);
        std::ofstream map(dir / "a_map.json");
        map << serialize_activity_map(a.map);
    }
    const std::string cfg = R"({"seed": 3, "source": "home_a", "targets": [],
      "homes": {"home_a": {"log": "a.log", "layout": "a_layout.json", "map": "a_map.json"}},
      "embedding": {"dimension": 64}, "output_dir": "out"})";
    std::istringstream in(cfg);
    const auto config = load_config(in, dir);
    const auto data = load_home(config, "home_a");
    CHECK(data.log.events.size() == a.log.events.size());
    CHECK(data.input_hashes.size() == 3);
    CHECK(data.input_hashes[0].second == sha256_hex(support::read_file(dir / "a.log")));
    const auto r = run_preprocess(config, "home_a");
    const auto manifest = nlohmann::json::parse(support::read_file(r.manifest_path));
    CHECK(manifest["inputs"]["log"]["path"] == "a.log");

    std::istringstream wrong_in(std::regex_replace(cfg, std::regex("\"home_a\""), "\"home_x\""));
    const auto wrong = load_config(wrong_in, dir);
    CHECK_THROWS_AS(load_home(wrong, "home_x"), ConfigError);
}

TEST_CASE("unknown sensors: error by default, dropped on request") {
    const auto dir = support::scratch_dir("unknown");
    const auto [a, b] = support::synthetic_pair(4, 1);
    EventLog log = a.log;
    // A stray sensor opens the first episode; its annotation moves to the next known event.
    auto stray = log.events.front();
    stray.sensor_id = "Q999";
    log.events.front().annotation.reset();
    log.events.insert(log.events.begin(), stray);
    log.events.insert(log.events.begin() + 10, support::event("2011-06-06", "00:00:00", "Q998", "ON"));
    std::sort(log.events.begin() + 1, log.events.end(),
              [](const SensorEvent& x, const SensorEvent& y) { return x.timestamp < y.timestamp; });
    {
        std::ofstream f(dir / "a.log");
        write_log(f, log);
        std::ofstream layout(dir / "a_layout.json");
        layout << serialize_layout(a.layout);
        std::ofstream map(dir / "a_map.json");
        map << serialize_activity_map(a.map);
    }
    const std::string cfg = R"({"seed": 3, "source": "home_a",
      "homes": {"home_a": {"log": "a.log", "layout": "a_layout.json", "map": "a_map.json"}},
      "embedding": {"dimension": 64}, "output_dir": "out")";
    std::istringstream strict_in(cfg + "}");
    CHECK_THROWS_AS(prepare_home(load_config(strict_in, dir), "home_a"), UnresolvedSensorError);

    std::istringstream lax_in(cfg + R"(, "skip_unknown_sensors": true})");
    const auto prepared = prepare_home(load_config(lax_in, dir), "home_a");
    CHECK(prepared.data.log.events.size() == a.log.events.size());
    CHECK(prepared.data.log.events.front().annotation == a.log.events.front().annotation);
    CHECK(prepared.segmentation.labeled_triggers == a.log.events.size());
}

TEST_CASE("weighted F1 agrees with the confusion-matrix oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t classes = 2 + rng.below(8);
        const std::size_t n = 1 + rng.below(300);
        std::vector<std::size_t> truth, predicted;
        std::vector<std::vector<std::size_t>> confusion(classes, std::vector<std::size_t>(classes, 0));
        for (std::size_t i = 0; i < n; ++i) {
            const auto t = rng.below(classes);
            const auto p = rng.bernoulli(0.5) ? t : rng.below(classes);
            truth.push_back(t);
            predicted.push_back(p);
            ++confusion[t][p];
        }
        CHECK(weighted_f1(truth, predicted) == doctest::Approx(oracle::weighted_f1(confusion)).epsilon(1e-12));
        std::size_t hits = 0;
        for (std::size_t c = 0; c < classes; ++c) hits += confusion[c][c];
        CHECK(accuracy(truth, predicted) == doctest::Approx(static_cast<double>(hits) / static_cast<double>(n)));
    }
    CHECK(weighted_f1({0, 0, 1, 1}, {0, 0, 1, 1}) == 1.0);
    CHECK(weighted_f1({0, 0, 1, 1}, {1, 1, 0, 0}) == 0.0);
    CHECK_THROWS_AS(weighted_f1({0}, {}), std::invalid_argument);
}

TEST_CASE("nearest centroid and raw-ID tokens") {
    NearestCentroid model;
    CHECK_THROWS_AS(model.predict({1.0, 0.0}), std::logic_error);
    model.fit({{1, 0}, {0.9, 0.1}, {0, 1}}, {3, 3, 7});
    CHECK(model.updates() == 1);
    CHECK(model.predict({0.8, 0.3}) == 3);
    CHECK(model.predict({0.1, 0.8}) == 7);
    CHECK(model.updates() == 1);

    const auto [a, b] = support::synthetic_pair(1, 1);
    const auto seg = segment(a.log, a.map);
    const auto windows = build_windows(a.log, seg, a.layout, TdostVariant::Basic, nullptr);
    const auto ids = id_token_windows(windows, a.log);
    REQUIRE(ids.size() == windows.size());
    const std::regex token("^[A-Z]+[0-9]+_[A-Z0-9.\\-]+$");
    for (const auto& w : ids)
        for (const auto& t : w.triggers) {
            REQUIRE(t.sentences.size() == 1);
            CHECK(std::regex_match(t.sentences[0], token));
        }
}

TEST_CASE("features-only transfer report") {
    const auto out = support::scratch_dir("transfer");
    const auto config = config_from(synthetic_config(out, R"(, "within_home": true)", 3));
    const auto report = run_transfer(config);
    CHECK(report.seed == 1);
    REQUIRE(report.results.size() == 2);
    CHECK(report.results[0].source == "home_a");
    CHECK(report.results[0].target == "home_a");
    const auto& r = report.results[1];
    CHECK(r.target == "home_b");
    CHECK(r.variant == "basic");
    CHECK(r.classifier == "nearest_centroid");
    CHECK(r.encoder == "hash");
    CHECK(r.folds.size() == 3);
    CHECK(r.accuracy_std.has_value());
    CHECK(r.target_updates == 0);
    CHECK(r.label_set.size() >= 6);
    for (const auto& [label, n] : r.class_counts) {
        const auto a = parse_common_activity(label);
        REQUIRE(a);
        CHECK(std::find(r.label_set.begin(), r.label_set.end(), *a) != r.label_set.end());
    }
    std::size_t tested = 0;
    for (const auto& f : r.folds) {
        CHECK(f.accuracy >= 0.0);
        CHECK(f.accuracy <= 1.0);
        tested += f.test_windows;
    }
    std::size_t counted = 0;
    for (const auto& [label, n] : r.class_counts) counted += n;
    CHECK(tested == counted);
    CHECK(r.source_manifest_sha256 == report.results[0].target_manifest_sha256);
    CHECK(fs::exists(out / "home_b" / "manifest.json"));

    std::istringstream in(report_to_json(report));
    const auto back = report_from_json(in);
    CHECK(report_to_json(back) == report_to_json(report));

    auto baseline = config;
    baseline.classifier = ClassifierKind::BaselineIds;
    baseline.within_home = false;
    const auto raw = run_transfer(baseline);
    REQUIRE(raw.results.size() == 1);
    CHECK(raw.results[0].variant == "raw_ids");
    CHECK(raw.results[0].accuracy_mean < r.accuracy_mean);
}

TEST_CASE("report table layout") {
    ExperimentReport report;
    report.seed = 1;
    TransferResult r;
    r.source = "home_a";
    r.target = "home_b";
    r.variant = "basic";
    r.classifier = "nearest_centroid";
    r.folds = {{0.8, 0.7, 10}, {0.6, 0.5, 10}};
    r.accuracy_mean = 0.7;
    r.wf1_mean = 0.6;
    r.accuracy_std = 0.1;
    r.wf1_std = 0.1;
    report.results.push_back(r);
    r.target = "home_c";
    r.folds.resize(1);
    r.accuracy_mean = 0.8;
    r.wf1_mean = 0.7;
    r.accuracy_std.reset();
    r.wf1_std.reset();
    report.results.push_back(r);
    const std::string table = format_report_table(report);
    CHECK(table ==
          "source  target  variant  classifier        folds     accuracy %  weighted F1 %\n"
          "------------------------------------------------------------------------------\n"
          "home_a  home_b  basic    nearest_centroid      2  70.00 ± 10.00  60.00 ± 10.00\n"
          "home_a  home_c  basic    nearest_centroid      1          80.00          70.00\n");
    const auto json = report_to_json(report);
    CHECK(json.find("acc_std") != std::string::npos);
    const auto doc = nlohmann::json::parse(json);
    CHECK_FALSE(doc["results"][1].contains("acc_std"));
    std::istringstream bad("{\"seed\": 1}");
    CHECK_THROWS_AS(report_from_json(bad), DataError);
}

#ifdef TDOST_PYTHON
TEST_CASE("trainer handshake") {
    if (std::string(TDOST_PYTHON).empty()) return;
    const auto out = support::scratch_dir("trainer");
    auto with_mode = [&](const std::string& mode) {
        auto config = config_from(synthetic_config(out));
        config.features_only = false;
        config.trainer_command = fake_trainer(mode);
        config.classifier = ClassifierKind::ConvBiLstm;
        return config;
    };
    const auto ok = run_transfer(with_mode("ok"));
    REQUIRE(ok.results.size() == 1);
    const auto& r = ok.results[0];
    CHECK(r.classifier == "convbilstm");
    CHECK(r.encoder == "fake-encoder");
    REQUIRE(r.folds.size() == 3);
    CHECK(r.accuracy_mean == doctest::Approx(0.6));
    CHECK(r.accuracy_std.has_value());

    const auto one = run_transfer(with_mode("one_fold"));
    CHECK(one.results[0].folds.size() == 1);
    CHECK_FALSE(one.results[0].accuracy_std.has_value());
    CHECK_FALSE(one.results[0].wf1_std.has_value());

    CHECK_THROWS_AS(run_transfer(with_mode("malformed")), ExternalError);
    CHECK_THROWS_AS(run_transfer(with_mode("out_of_range")), ExternalError);
    CHECK_THROWS_AS(run_transfer(with_mode("fail")), ExternalError);
}
#endif
