#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "labelqa/components.hpp"
#include "labelqa/volume.hpp"

namespace labelqa {

/// Component-level confusion counts.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    bool operator==(const ConfusionCounts&) const = default;
};

/// A ratio whose denominator may be zero. Empty means undefined, which is
/// never folded into 0 or 1.
using Ratio = std::optional<double>;

struct ComponentMetrics {
    Ratio sensitivity;
    Ratio precision;
    ConfusionCounts counts;
    /// Attention components, used as the precision denominator.
    std::uint64_t attention_components = 0;
    std::uint64_t error_components = 0;
};

/// Voxelwise pseudo XOR truth: false positives plus false negatives.
VolumeGrid error_region(const VolumeGrid& pseudo, const VolumeGrid& truth);

/// Scores an attention mask against benchmark error components.
///   TP: error components touching attention in at least one voxel
///   FN: error components with no attention voxel
///   FP: attention components touching no error voxel
///   sensitivity = TP / (TP + FN)
///   precision = attention components touching error / attention components
ComponentMetrics componentwise_metrics(const VolumeGrid& attention,
                                       const VolumeGrid& benchmark_error,
                                       Connectivity connectivity = kDefaultConnectivity);

/// 2|A and B| / (|A| + |B|); 1.0 when both masks are empty.
double dsc(const VolumeGrid& a, const VolumeGrid& b);

/// Mean organ DSC over codes present in either labelling (1.0 if none is).
double mean_organ_dsc(const LabelVolume& a, const LabelVolume& b);

/// Row-major M x M matrix of pairwise DSC for one organ code.
struct DscMatrix {
    std::vector<std::string> ids;
    std::vector<double> values;
    double at(std::size_t row, std::size_t col) const { return values[row * ids.size() + col]; }
};

DscMatrix dsc_matrix(std::span<const LabelVolume> labelings, int organ_code,
                     std::vector<std::string> ids = {});

struct CaseMask {
    std::string case_id;
    VolumeGrid mask;
};

struct FalsePositiveCase {
    std::string case_id;
    bool flagged = false;
    std::uint64_t components = 0;
    std::uint64_t voxels = 0;
    double size_mm3 = 0.0;
};

struct FalsePositiveScan {
    std::uint64_t case_count = 0;
    std::uint64_t flagged_case_count = 0;
    std::uint64_t total_component_count = 0;
    /// flagged / total, as a fraction.
    double false_positive_rate = 0.0;
    std::vector<FalsePositiveCase> cases;
};

/// Counts predicted foreground in cases known to contain no target.
FalsePositiveScan false_positive_scan(std::span<const CaseMask> pred_masks,
                                      Connectivity connectivity = kDefaultConnectivity);

/// Per (case, organ) evaluation row.
struct OrganMetrics {
    std::string case_id;
    std::string organ;
    ComponentMetrics component;
    double dsc = 1.0;
};

struct MetricsReport {
    std::vector<OrganMetrics> rows;
    Connectivity connectivity = kDefaultConnectivity;

    /// Mean of the defined per-row values for one organ name; undefined when
    /// no row defines it.
    Ratio mean_sensitivity(const std::string& organ) const;
    Ratio mean_precision(const std::string& organ) const;
};

/// Evaluates one case organ by organ: the attention sub-mask of each organ
/// against the error region of that organ's pseudo vs truth masks.
std::vector<OrganMetrics> evaluate_case(const std::string& case_id,
                                        std::span<const VolumeGrid> organ_attention,
                                        const LabelVolume& pseudo, const LabelVolume& truth,
                                        Connectivity connectivity = kDefaultConnectivity);

}  // namespace labelqa
