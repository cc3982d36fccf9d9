#pragma once

// Seeded random inputs for property tests. Every generator takes the Rng by
// reference so a failing trial can be replayed from its seed.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "labelqa/volume.hpp"

namespace labelqa::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    bool coin(double p_true) { return uniform() < p_true; }
    std::uint64_t bits() { return engine_(); }
    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(items.size()) - 1))];
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline Dims random_dims(Rng& rng, std::int64_t max_side) {
    return {rng.uniform_int(1, max_side), rng.uniform_int(1, max_side), rng.uniform_int(1, max_side)};
}

// Spacings exactly representable as float, so NIfTI round trips are exact.
inline Spacing random_spacing(Rng& rng) {
    static const std::vector<double> steps = {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 5.0};
    return {rng.pick(steps), rng.pick(steps), rng.pick(steps)};
}

inline Geometry random_geometry(Rng& rng, std::int64_t max_side) {
    return Geometry::make(random_dims(rng, max_side), random_spacing(rng));
}

inline VolumeGrid random_mask(Rng& rng, const Geometry& g, double density) {
    std::vector<std::uint8_t> v(g.voxel_count());
    for (auto& x : v) x = rng.coin(density) ? 1 : 0;
    return VolumeGrid::from_values(g, std::move(v));
}

// Probabilities on a 1/16 lattice plus exact 0 and 1: thresholds such as
// 0.1 and 0.5 are never hit within rounding distance by std or entropy.
inline float lattice_probability(Rng& rng) {
    return static_cast<float>(rng.uniform_int(0, 16)) / 16.0F;
}

inline VolumeGrid random_channel(Rng& rng, const Geometry& g) {
    std::vector<float> v(g.voxel_count());
    for (auto& x : v) x = lattice_probability(rng);
    return VolumeGrid::from_values(g, std::move(v));
}

inline VolumeGrid uniform_channel(Rng& rng, const Geometry& g) {
    std::vector<float> v(g.voxel_count());
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    return VolumeGrid::from_values(g, std::move(v));
}

inline PredictionSet random_prediction_set(Rng& rng, const Geometry& g, std::size_t members,
                                           std::size_t channels, const std::string& case_id = "case") {
    std::vector<SoftPrediction> out;
    for (std::size_t m = 0; m < members; ++m) {
        std::vector<VolumeGrid> ch;
        for (std::size_t c = 0; c < channels; ++c) ch.push_back(random_channel(rng, g));
        out.emplace_back("model" + std::to_string(m), std::move(ch));
    }
    return PredictionSet(case_id, std::move(out));
}

inline LabelVolume random_labels(Rng& rng, const Geometry& g, int organs) {
    std::vector<std::uint8_t> v(g.voxel_count());
    for (auto& x : v) x = static_cast<std::uint8_t>(rng.uniform_int(0, organs));
    return LabelVolume(VolumeGrid::from_values(g, std::move(v)), OrganLabelMap::numbered(organs));
}

/// Full-range values of the given kind on a random grid of side <= 9.
inline VolumeGrid random_grid(Rng& rng, ElementKind kind) {
    const auto g = random_geometry(rng, 9);
    const std::size_t n = g.voxel_count();
    switch (kind) {
        case ElementKind::UInt8: {
            std::vector<std::uint8_t> v(n);
            for (auto& x : v) x = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
            return VolumeGrid::from_values(g, std::move(v));
        }
        case ElementKind::Int16: {
            std::vector<std::int16_t> v(n);
            for (auto& x : v) x = static_cast<std::int16_t>(rng.uniform_int(-32768, 32767));
            return VolumeGrid::from_values(g, std::move(v));
        }
        case ElementKind::Float32: break;
    }
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform() * 2000.0 - 1000.0);
    return VolumeGrid::from_values(g, std::move(v));
}

}  // namespace labelqa::testing
