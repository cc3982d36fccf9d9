#include "labelqa/detect.hpp"

#include "kernels/kernels_internal.hpp"
#include "labelqa/ensemble.hpp"

namespace labelqa {

void DetectionConfig::validate() const {
    if (!(tau_inconsistency > 0.0 && tau_inconsistency <= 0.5)) {
        throw DomainError("tau_inconsistency must lie in (0, 0.5]");
    }
    if (!(tau_uncertainty > 0.0 && tau_uncertainty <= 1.0)) {
        throw DomainError("tau_uncertainty must lie in (0, 1]");
    }
    if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
        throw DomainError("binarize_threshold must lie in (0, 1)");
    }
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("entropy needs a probability in [0, 1]");
    return simd::binary_entropy(p);
}

std::vector<VolumeGrid> inconsistency_map(const PredictionSet& preds) {
    if (preds.member_count() < 2) {
        throw DomainError("inconsistency needs at least two models, case '" + preds.case_id() +
                          "' has " + std::to_string(preds.member_count()));
    }
    return ensemble_stats(preds).std_dev;
}

std::vector<VolumeGrid> uncertainty_map(std::span<const VolumeGrid> channels) {
    require_aligned_channels(channels, "uncertainty_map");
    const auto& kernels = simd::active();
    std::vector<VolumeGrid> out;
    out.reserve(channels.size());
    for (const auto& ch : channels) {
        const auto p = ch.values<float>();
        for (float v : p) {
            if (!(v >= 0.0F && v <= 1.0F)) throw DomainError("uncertainty_map: probability outside [0, 1]");
        }
        std::vector<float> h(p.size());
        kernels.binary_entropy_f32(p.data(), p.size(), h.data());
        out.push_back(VolumeGrid::from_values(ch.geometry(), std::move(h)));
    }
    return out;
}

VolumeGrid overlap_map(std::span<const VolumeGrid> channels, double binarize_threshold) {
    require_aligned_channels(channels, "overlap_map");
    if (!(binarize_threshold > 0.0 && binarize_threshold <= 1.0)) {
        throw DomainError("overlap_map: threshold must lie in (0, 1]");
    }
    const auto& kernels = simd::active();
    const std::size_t n = channels.front().size();
    const float t = float_at_or_above(binarize_threshold);
    std::vector<std::uint8_t> count(n, 0);
    for (const auto& ch : channels) kernels.count_ge_f32(ch.values<float>().data(), n, t, count.data());
    std::vector<std::uint8_t> out(n);
    kernels.threshold_u8(count.data(), n, 2, out.data());
    return VolumeGrid::from_values(channels.front().geometry(), std::move(out));
}

namespace {

VolumeGrid threshold(const VolumeGrid& values, double tau) {
    const auto v = values.values<float>();
    std::vector<std::uint8_t> out(v.size());
    simd::active().threshold_f32(v.data(), v.size(), float_at_or_above(tau), out.data());
    return VolumeGrid::from_values(values.geometry(), std::move(out));
}

}  // namespace

AttentionMap build_attention(const PredictionSet& preds, const DetectionConfig& cfg) {
    cfg.validate();
    if (preds.member_count() < 2) {
        throw DomainError("attention needs at least two models, case '" + preds.case_id() +
                          "' has " + std::to_string(preds.member_count()));
    }
    const Geometry& geometry = preds.geometry();
    const auto stats = ensemble_stats(preds);
    const auto entropy = uncertainty_map(stats.mean);
    const std::size_t organs = preds.channel_count();

    auto inconsistency = VolumeGrid::filled<std::uint8_t>(geometry, 0);
    auto uncertainty = VolumeGrid::filled<std::uint8_t>(geometry, 0);
    std::vector<VolumeGrid> organ_criteria;
    std::vector<VolumeGrid> organ_present;
    organ_criteria.reserve(organs);
    for (std::size_t c = 0; c < organs; ++c) {
        const auto inc = threshold(stats.std_dev[c], cfg.tau_inconsistency);
        const auto unc = threshold(entropy[c], cfg.tau_uncertainty);
        inconsistency = mask_or(inconsistency, inc);
        uncertainty = mask_or(uncertainty, unc);
        organ_criteria.push_back(mask_or(inc, unc));
        organ_present.push_back(binarize(stats.mean[c], cfg.binarize_threshold));
    }
    auto overlap = overlap_map(stats.mean, cfg.binarize_threshold);

    auto raw_union = mask_or(mask_or(inconsistency, uncertainty), overlap);
    const auto kept = remove_small_components(raw_union, cfg.min_component_voxels, cfg.connectivity);

    AttentionMap map;
    map.case_id = preds.case_id();
    map.inconsistency_mask = mask_and(inconsistency, kept);
    map.uncertainty_mask = mask_and(uncertainty, kept);
    map.overlap_mask = mask_and(overlap, kept);
    map.union_mask = mask_or(mask_or(map.inconsistency_mask, map.uncertainty_mask), map.overlap_mask);
    for (std::size_t c = 0; c < organs; ++c) {
        const auto organ_overlap = mask_and(map.overlap_mask, organ_present[c]);
        auto organ = mask_and(mask_or(organ_criteria[c], organ_overlap), kept);
        map.organ_mm3.push_back(physical_volume(organ));
        map.per_organ_masks.push_back(std::move(organ));
    }
    map.total_mm3 = physical_volume(map.union_mask);
    map.components = connected_components(map.union_mask, cfg.connectivity).components;
    return map;
}

}  // namespace labelqa
