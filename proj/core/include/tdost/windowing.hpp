#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdost/activity_mapping.hpp"
#include "tdost/event_log.hpp"
#include "tdost/renderer.hpp"

namespace tdost {

struct SegmentOptions {
    std::size_t window_size = 100;
    std::size_t min_length = 10;  // shorter remainders are discarded
    std::size_t stride = 0;       // 0: non-overlapping chunks; otherwise sliding windows (ablation only)
};

/// Events [begin, end) of one log, all carrying `label`.
struct LabeledPiece {
    CommonActivity label = CommonActivity::Other;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

struct DiscardReport {
    std::size_t pieces = 0;
    std::size_t triggers = 0;
};

struct Segmentation {
    std::vector<LabeledPiece> pieces;
    DiscardReport discarded;
    std::size_t labeled_triggers = 0;
};

/// Per-event common labels from begin/end annotations. Events outside every annotated span are
/// Other; overlapping spans label an event with the most recently opened one. Throws
/// SegmentationError for an end without begin, a repeated begin, or a begin left open, and
/// UnmappedLabelError for labels the map lacks.
std::vector<CommonActivity> label_events(const EventLog& log, const ActivityMap& map);

/// Maximal same-label runs cut into window_size chunks; a final remainder is kept when it has at
/// least min_length triggers.
Segmentation segment(const EventLog& log, const ActivityMap& map, const SegmentOptions& options = {});

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);

struct FoldAssignment {
    int fold = 0;  // the fold in which this window is test data
    Split split = Split::Train;

    friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

struct TdostWindow {
    std::string window_id;
    std::string home_id;
    std::string group_id;  // shared by the three windows triplicated from one activity window
    CommonActivity label = CommonActivity::Other;
    std::vector<RenderedTrigger> triggers;
    std::optional<int> llm_slot;
    std::optional<FoldAssignment> fold_assignment;
};

/// Renders every piece of a segmentation. Window ids are "<home>-w<nnnnn>".
std::vector<TdostWindow> build_windows(const EventLog& log, const Segmentation& segmentation, const HomeLayout& layout,
                                       TdostVariant variant, const AugmentationCache* augmentation,
                                       const RenderOptions& options = {});

/// Three windows per input; window j keeps sentence j of every trigger and has llm_slot j. Throws
/// std::invalid_argument for non-LLM variants or triggers without three sentences.
std::vector<TdostWindow> triplicate_llm(std::span<const TdostWindow> windows, TdostVariant variant);

struct FoldOptions {
    int folds = 3;
    double val_fraction = 0.2;
    /// Shuffle triplicated siblings independently instead of keeping them in one fold.
    bool ungrouped_shuffle = false;
};

struct FoldPlan {
    std::uint64_t seed = 0;
    /// Disjoint window-id sets covering every window; folds[f] is the test split of fold f.
    std::vector<std::vector<std::string>> folds;
    /// Subset of each folds[p] that serves as validation data whenever p is not the test fold.
    std::vector<std::vector<std::string>> val;
    std::vector<std::string> warnings;

    struct View {
        std::vector<std::string> train;
        std::vector<std::string> val;
        std::vector<std::string> test;
    };
    View view(int fold) const;
    FoldAssignment assignment_of(std::string_view window_id) const;
};

/// Stratified assignment driven only by `seed`. Per class, stratification units (windows, or
/// sibling groups unless ungrouped_shuffle) are dealt round-robin so per-fold counts differ by at
/// most one; classes with fewer units than folds are reported in warnings.
FoldPlan make_folds(std::span<const TdostWindow> windows, std::uint64_t seed, const FoldOptions& options = {});

void apply_folds(std::vector<TdostWindow>& windows, const FoldPlan& plan);

/// One JSON object per line:
/// {"window_id","home","label","fold","split","llm_slot","sentences":[[...],...],"lags":[null,int,...]}
void write_windows_jsonl(std::ostream& out, std::span<const TdostWindow> windows);
std::string window_to_json(const TdostWindow& window);

/// Reads back the export (the trainer's view: triggers carry sentences and lags only).
std::vector<TdostWindow> read_windows_jsonl(std::istream& in);

}  // namespace tdost
