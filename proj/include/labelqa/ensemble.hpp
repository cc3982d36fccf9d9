#pragma once

#include <vector>

#include "labelqa/volume.hpp"

namespace labelqa {

/// Unweighted per-voxel mean of the members' probabilities, one float32 grid
/// per organ channel. Invariant under member order.
std::vector<VolumeGrid> mean_soft(const PredictionSet& preds);

/// labels_from_soft(mean_soft(preds), threshold).
LabelVolume ensemble_label(const PredictionSet& preds,
                           double binarize_threshold = kDefaultBinarizeThreshold);
LabelVolume ensemble_label(const PredictionSet& preds, double binarize_threshold,
                           const OrganLabelMap& labels);

/// Mean and population standard deviation of every channel in one pass.
struct EnsembleStats {
    std::vector<VolumeGrid> mean;
    std::vector<VolumeGrid> std_dev;
};
EnsembleStats ensemble_stats(const PredictionSet& preds);

/// Organ map with one entry per channel: the standard abdominal map when the
/// channel count is 9, numbered codes otherwise.
OrganLabelMap default_labels_for(std::size_t channel_count);

}  // namespace labelqa
