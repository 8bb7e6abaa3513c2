#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tdost/activity_mapping.hpp"
#include "tdost/chat_client.hpp"
#include "tdost/embedding.hpp"
#include "tdost/event_log.hpp"
#include "tdost/home_metadata.hpp"
#include "tdost/llm_augmenter.hpp"
#include "tdost/renderer.hpp"
#include "tdost/windowing.hpp"

namespace tdost {

enum class ClassifierKind { BiLstm, ConvBiLstm, BaselineIds };
std::string_view classifier_name(ClassifierKind k);  // "bilstm", "convbilstm", "baseline_ids"
ClassifierKind parse_classifier(std::string_view name);

/// Where a home's data comes from: recorded files, or a synthetic template generated in memory.
struct HomeSource {
    std::filesystem::path log;
    std::filesystem::path layout;
    std::filesystem::path map;
    std::optional<std::filesystem::path> cache;

    std::optional<std::filesystem::path> templ;
    int days = 7;
    double noise_rate = 0.0;
    std::uint64_t salt = 1;  // generator seed = derive_seed(config seed, salt)

    bool synthetic() const { return templ.has_value(); }
};

struct ExperimentConfig {
    std::filesystem::path base_dir;  // relative paths in the file resolve against this
    std::string source;
    std::vector<std::string> targets;
    std::map<std::string, HomeSource> homes;
    TdostVariant variant = TdostVariant::Basic;
    std::optional<std::uint64_t> seed;
    EmbeddingSpec embedding;
    std::optional<std::filesystem::path> embedding_sentences;  // external provider
    std::optional<std::filesystem::path> embedding_matrix;
    ClassifierKind classifier = ClassifierKind::BiLstm;
    bool features_only = true;
    std::optional<std::string> trainer_command;
    bool within_home = false;  // add a source->source row to transfer reports
    SegmentOptions windows;
    FoldOptions folds;
    RenderOptions render;
    bool skip_unknown_sensors = false;
    bool lenient = false;
    std::filesystem::path output_dir = "out";
    ChatEndpoint llm;
    AugmentOptions augment;

    /// Throws ConfigError: missing seed, unknown homes, source listed among targets, paths that do
    /// not exist.
    void validate() const;
    std::uint64_t require_seed() const;
};

ExperimentConfig load_config(std::istream& in, const std::filesystem::path& base_dir);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Everything the pipeline needs about one home, loaded and cross-checked.
struct HomeData {
    std::string home_id;
    EventLog log;
    ParseSummary parse_summary;
    HomeLayout layout;
    ActivityMap map;
    std::optional<AugmentationCache> cache;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // name -> sha256
};

HomeData load_home(const ExperimentConfig& config, const std::string& home_id);

/// Windows for one home: segmented, rendered, triplicated for LLM variants, folds applied.
struct PreparedHome {
    HomeData data;
    Segmentation segmentation;
    std::vector<TdostWindow> windows;
    FoldPlan plan;
};

PreparedHome prepare_home(const ExperimentConfig& config, const std::string& home_id);

struct PreprocessResult {
    std::filesystem::path dataset_path;
    std::filesystem::path manifest_path;
    std::string dataset_sha256;
    std::string manifest_sha256;
    std::size_t window_count = 0;
};

/// Writes <output_dir>/<home>/dataset.jsonl and manifest.json.
PreprocessResult run_preprocess(const ExperimentConfig& config, const std::string& home_id);

struct FoldMetrics {
    double accuracy = 0;
    double weighted_f1 = 0;
    std::size_t test_windows = 0;
};

struct TransferResult {
    std::string source;
    std::string target;
    std::string variant;
    std::string classifier;
    std::string encoder;
    std::vector<CommonActivity> label_set;
    std::vector<FoldMetrics> folds;
    double accuracy_mean = 0;
    double wf1_mean = 0;
    std::optional<double> accuracy_std;  // population std; present with >= 2 folds
    std::optional<double> wf1_std;
    std::map<std::string, std::size_t> class_counts;  // target test windows per label, all folds
    std::string source_manifest_sha256;
    std::string target_manifest_sha256;
    std::size_t target_updates = 0;  // the target phase never updates model state
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::vector<TransferResult> results;
};

ExperimentReport run_transfer(const ExperimentConfig& config);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::istream& in);
std::string format_report_table(const ExperimentReport& report);

/// Support-weighted mean of per-class F1 over the classes present in `truth`.
double weighted_f1(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted);
double accuracy(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted);

/// Mean-pooled, L2-normalised sentence embeddings per window.
std::vector<std::vector<double>> pooled_features(std::span<const EmbeddedWindow> windows);

/// Nearest-centroid classifier over pooled window features (cosine similarity). Fitting is the
/// only state change; predict is const.
class NearestCentroid {
public:
    void fit(const std::vector<std::vector<double>>& features, const std::vector<std::size_t>& labels);
    std::size_t predict(const std::vector<double>& feature) const;
    std::size_t updates() const { return updates_; }

private:
    std::map<std::size_t, std::vector<double>> centroids_;
    std::size_t updates_ = 0;
};

/// One "<ID>_<VALUE>" token per trigger: the layout-specific representation used as the raw-ID
/// baseline.
std::vector<TdostWindow> id_token_windows(std::span<const TdostWindow> windows, const EventLog& log);

}  // namespace tdost
