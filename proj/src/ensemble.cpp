#include "labelqa/ensemble.hpp"

#include "labelqa/kernels.hpp"

namespace labelqa {

namespace {

std::vector<const float*> member_pointers(const PredictionSet& preds, std::size_t channel) {
    std::vector<const float*> out;
    out.reserve(preds.member_count());
    for (const auto& m : preds.members()) out.push_back(m.channels()[channel].values<float>().data());
    return out;
}

EnsembleStats compute(const PredictionSet& preds, bool with_std) {
    const auto& kernels = simd::active();
    const Geometry& geometry = preds.geometry();
    const std::size_t n = geometry.voxel_count();
    EnsembleStats stats;
    for (std::size_t c = 0; c < preds.channel_count(); ++c) {
        const auto ptrs = member_pointers(preds, c);
        std::vector<float> mean(n);
        std::vector<float> sd(with_std ? n : 0);
        kernels.ensemble_stats(ptrs.data(), ptrs.size(), n, mean.data(),
                               with_std ? sd.data() : nullptr);
        stats.mean.push_back(VolumeGrid::from_values(geometry, std::move(mean)));
        if (with_std) stats.std_dev.push_back(VolumeGrid::from_values(geometry, std::move(sd)));
    }
    return stats;
}

}  // namespace

std::vector<VolumeGrid> mean_soft(const PredictionSet& preds) {
    return compute(preds, false).mean;
}

EnsembleStats ensemble_stats(const PredictionSet& preds) { return compute(preds, true); }

OrganLabelMap default_labels_for(std::size_t channel_count) {
    auto standard = OrganLabelMap::standard();
    if (static_cast<int>(channel_count) == standard.size()) return standard;
    return OrganLabelMap::numbered(static_cast<int>(channel_count));
}

LabelVolume ensemble_label(const PredictionSet& preds, double binarize_threshold) {
    return ensemble_label(preds, binarize_threshold, default_labels_for(preds.channel_count()));
}

LabelVolume ensemble_label(const PredictionSet& preds, double binarize_threshold,
                           const OrganLabelMap& labels) {
    return labels_from_soft(mean_soft(preds), binarize_threshold, labels);
}

}  // namespace labelqa
