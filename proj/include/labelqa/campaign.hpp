#pragma once

// Human-in-the-loop annotation campaign: rank cases by attention size, pick
// the ones worth a human pass, track their status across model iterations
// and decide when to stop.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "labelqa/detect.hpp"
#include "labelqa/volume.hpp"

namespace labelqa::campaign {

enum class Status { Pending, Revised, Confirmed };

std::string_view to_string(Status status);
Status status_from_string(std::string_view text);

/// Only pending -> revised and pending -> confirmed are legal.
bool is_legal_transition(Status from, Status to);

class IllegalTransition : public DomainError {
public:
    using DomainError::DomainError;
};

struct CaseEntry {
    std::string case_id;
    std::vector<double> organ_mm3;
    double total_mm3 = 0.0;
    Status status = Status::Pending;
    std::int64_t loop_seen = 0;
    std::vector<std::string> error_tags;
    std::string created_at;
    std::string updated_at;

    bool operator==(const CaseEntry&) const = default;
};

struct CampaignConfig {
    DetectionConfig detection;
    /// Cases whose total attention exceeds this are sent for revision.
    double size_threshold_mm3 = 0.0;
    std::vector<std::string> organ_names;

    bool operator==(const CampaignConfig& o) const;
};

struct CampaignState {
    static constexpr int kVersion = 1;
    /// Model iteration whose predictions produced the current entries.
    std::int64_t loop_index = 0;
    CampaignConfig config;
    std::vector<CaseEntry> cases;

    /// Case ids by total_mm3 descending, ties by case id ascending.
    std::vector<std::string> ranking() const;
    const CaseEntry& find(const std::string& case_id) const;

    bool operator==(const CampaignState&) const = default;
};

struct Ranking {
    std::vector<std::string> order;
    /// Sizes in rank order: the size-vs-rank curve.
    std::vector<double> sizes_mm3;
};

/// Deterministic total order: larger attention first, then case id.
Ranking rank_cases(std::span<const CaseEntry> entries);

/// Ranked cases with total_mm3 > threshold, in rank order.
std::vector<std::string> select_for_revision(const Ranking& ranking, double size_threshold_mm3);

/// Advisory cut: number of leading cases before the largest ratio drop
/// between consecutive sorted sizes. Empty with fewer than two cases or when
/// no drop exists.
std::optional<std::size_t> knee_cut(std::span<const double> sorted_sizes_mm3);

struct WorkloadEstimate {
    std::uint64_t cases_needing_revision = 0;
    std::uint64_t total_cases = 0;
    double minutes_per_case = 15.0;
    double hours_per_day = 8.0;
    double estimated_days = 0.0;
    /// revised / total.
    double human_fraction = 0.0;
    /// 100 * revised / total, computed directly to avoid a rounding step.
    double human_percent = 0.0;
};

WorkloadEstimate estimate_workload(std::uint64_t revision_count, std::uint64_t total_cases,
                                   double minutes_per_case = 15.0, double hours_per_day = 8.0);

/// Current UTC time as ISO-8601.
std::string utc_now();

/// New state with one case moved out of pending and `tags` appended.
CampaignState mark_case(const CampaignState& state, const std::string& case_id, Status new_status,
                        const std::vector<std::string>& tags, const std::string& now = utc_now());

/// True iff the top-ranked case is confirmed.
bool stopping_check(const CampaignState& state);

/// Fresh state for one loop from per-case attention sizes.
CampaignState init_state(const std::vector<AttentionMap>& maps, const CampaignConfig& config,
                         std::int64_t loop_index = 0, const std::string& now = utc_now());
CampaignState init_state(std::vector<CaseEntry> entries, const CampaignConfig& config,
                         std::int64_t loop_index = 0, const std::string& now = utc_now());

/// Starts the next loop: sizes replaced from `entries`, statuses reset to
/// pending, tags kept.
CampaignState advance_loop(const CampaignState& state, std::vector<CaseEntry> entries,
                           const std::string& now = utc_now());

std::string to_json(const CampaignState& state);
CampaignState state_from_json(const std::string& text);
void save_state(const CampaignState& state, const std::filesystem::path& path);
CampaignState load_state(const std::filesystem::path& path);

/// CSV: rank, case_id, total_mm3, one column per organ.
std::string ranking_csv(const CampaignState& state);
std::string curve_csv(const Ranking& ranking);

/// A perfect annotator who only looks inside the attention map: truth where
/// the union mask is set, pseudo elsewhere.
LabelVolume simulate_revision(const LabelVolume& pseudo, const LabelVolume& truth,
                              const AttentionMap& attention);

/// Voxels where two labelings differ.
std::uint64_t count_label_errors(const LabelVolume& a, const LabelVolume& b);

struct CaseLoopRecord {
    std::string case_id;
    double total_mm3 = 0.0;
    bool revised = false;
    double dsc_before = 0.0;
    double dsc_after = 0.0;
    std::uint64_t error_voxels_before = 0;
    std::uint64_t residual_error_voxels = 0;
    double residual_error_mm3 = 0.0;
};

struct LoopReport {
    std::int64_t loop = 0;
    double total_attention_mm3 = 0.0;
    std::uint64_t revised_count = 0;
    double residual_error_mm3 = 0.0;
    bool stop = false;
    std::vector<std::string> ranking;
    /// Sorted by case id.
    std::vector<CaseLoopRecord> cases;
};

struct CampaignReport {
    CampaignConfig config;
    std::vector<LoopReport> loops;
    bool converged = false;
};

/// Revised labels of one loop, keyed by case id.
using RevisedLabels = std::map<std::string, LabelVolume>;

/// Supplies the prediction sets for a loop. Called with the previous loop's
/// revised labels (empty for loop 0). Throws NotFoundError when the loop has
/// no predictions.
using PredictionSource =
    std::function<std::vector<PredictionSet>(std::int64_t loop, const RevisedLabels& previous)>;

/// Predictions prepared outside the process, one list per loop.
PredictionSource supplied_predictions(std::vector<std::vector<PredictionSet>> per_loop);

/// Loop 0 uses `initial`; later loops replace every revised case by K
/// identical one-hot members built from its revised labels and keep the
/// previous predictions for the rest.
PredictionSource revised_as_next(std::vector<PredictionSet> initial);

/// One-hot soft prediction with one channel per organ.
SoftPrediction one_hot(const LabelVolume& labels, const std::string& model_id);

struct LoopOptions {
    std::int64_t max_loops = 1;
    unsigned jobs = 1;
};

/// Detect, rank, select, revise; repeat until the top-ranked case needs no
/// revision (its attention is at or below the threshold) or the loop budget
/// is spent.
CampaignReport run_loop(const PredictionSource& source,
                        const std::map<std::string, LabelVolume>& truths,
                        const CampaignConfig& config, const LoopOptions& options);

std::string to_json(const CampaignReport& report);

}  // namespace labelqa::campaign
