#pragma once

#include <string>
#include <vector>

#include "labelqa/components.hpp"
#include "labelqa/volume.hpp"

namespace labelqa {

/// Thresholds for the three error criteria. Defaults are not calibrated
/// values; every field is exposed on the command line and echoed to outputs.
struct DetectionConfig {
    /// Cross-model standard deviation threshold, in (0, 0.5].
    double tau_inconsistency = 0.1;
    /// Normalised binary entropy threshold, in (0, 1].
    double tau_uncertainty = 0.5;
    /// Probability at which an organ channel counts as present, in (0, 1).
    double binarize_threshold = kDefaultBinarizeThreshold;
    /// Components of the union smaller than this are dropped (0 keeps all).
    std::uint64_t min_component_voxels = 0;
    /// Adjacency used by the speckle filter and the component inventory.
    Connectivity connectivity = kDefaultConnectivity;

    void validate() const;
};

struct AttentionMap {
    std::string case_id;
    /// OR of the three source masks.
    VolumeGrid union_mask;
    /// Channel c holds organ code c+1.
    std::vector<VolumeGrid> per_organ_masks;
    VolumeGrid inconsistency_mask;
    VolumeGrid uncertainty_mask;
    VolumeGrid overlap_mask;
    std::vector<double> organ_mm3;
    double total_mm3 = 0.0;
    /// Components of the union, ids as in connected_components().
    std::vector<Component> components;
};

/// Population standard deviation across members, per organ channel.
/// Requires at least two members.
std::vector<VolumeGrid> inconsistency_map(const PredictionSet& preds);

/// Normalised binary entropy per voxel of each channel; 0*log(0) is 0.
std::vector<VolumeGrid> uncertainty_map(std::span<const VolumeGrid> channels);

/// Binary entropy in bits of a single probability.
double binary_entropy(double p);

/// 1 where at least two channels reach `binarize_threshold`.
VolumeGrid overlap_map(std::span<const VolumeGrid> channels,
                       double binarize_threshold = kDefaultBinarizeThreshold);

AttentionMap build_attention(const PredictionSet& preds, const DetectionConfig& cfg = {});

}  // namespace labelqa
