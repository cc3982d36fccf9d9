// Small hand-evaluated cases, one per documented behaviour. Each lives in the
// suite of the module it exercises.

#include <doctest.h>

#include <cmath>

#include "labelqa/components.hpp"
#include "labelqa/detect.hpp"
#include "labelqa/ensemble.hpp"
#include "labelqa/metrics.hpp"

using namespace labelqa;

namespace {

Geometry line(std::int64_t n, Spacing s = {}) { return Geometry::make({n, 1, 1}, s); }

VolumeGrid floats(std::vector<float> v) {
    const auto g = line(static_cast<std::int64_t>(v.size()));
    return VolumeGrid::from_values(g, std::move(v));
}

VolumeGrid bytes(const Geometry& g, std::vector<std::uint8_t> v) { return VolumeGrid::from_values(g, std::move(v)); }

/// Single-voxel prediction set; member m contributes `probs[m]` in channel 0.
PredictionSet one_voxel(const std::vector<float>& probs) {
    std::vector<SoftPrediction> members;
    for (std::size_t m = 0; m < probs.size(); ++m) {
        members.emplace_back("m" + std::to_string(m), std::vector<VolumeGrid>{floats({probs[m]})});
    }
    return PredictionSet("c", std::move(members));
}

/// Mask with the listed (i, j, k) voxels set.
VolumeGrid voxels(const Geometry& g, std::initializer_list<std::array<std::int64_t, 3>> set) {
    std::vector<std::uint8_t> v(g.voxel_count(), 0);
    for (const auto& p : set) v[g.dims.index(p[0], p[1], p[2])] = 1;
    return VolumeGrid::from_values(g, std::move(v));
}

}  // namespace

TEST_SUITE("volume") {

TEST_CASE("binarize at 0.5 sends 0.49 to 0 and 0.50 to 1") {
    CHECK(binarize(floats({0.49F, 0.50F}), 0.5) == bytes(line(2), {0, 1}));
    CHECK(binarize(floats({0.0F, 0.0F}), 0.5) == bytes(line(2), {0, 0}));
    CHECK(binarize(floats({1.0F, 1.0F}), 0.5) == bytes(line(2), {1, 1}));
}

TEST_CASE("argmax labelling of single voxels") {
    auto code = [](float a, float b) {
        const std::vector<VolumeGrid> ch{floats({a}), floats({b})};
        return labels_from_soft(ch, 0.5).codes()[0];
    };
    CHECK(code(0.9F, 0.1F) == 1);
    CHECK(code(0.3F, 0.3F) == 0);
    CHECK(code(0.6F, 0.6F) == 1);
}

TEST_CASE("physical volume multiplies count by voxel volume") {
    CHECK(physical_volume(bytes(line(4), {0, 0, 0, 0})) == 0.0);
    CHECK(physical_volume(VolumeGrid::filled<std::uint8_t>(line(10), 1)) == 10.0);
    CHECK(physical_volume(VolumeGrid::filled<std::uint8_t>(line(4, {0.5, 0.5, 2.0}), 1)) == 2.0);
}

}  // TEST_SUITE

TEST_SUITE("detect") {

TEST_CASE("identical members have zero inconsistency") {
    const auto sd = inconsistency_map(one_voxel({0.3F, 0.3F, 0.3F}));
    CHECK(sd[0].at(0) == 0.0);
}

TEST_CASE("three members at 0.2, 0.5, 0.8 spread by sqrt(0.06)") {
    const auto sd = inconsistency_map(one_voxel({0.2F, 0.5F, 0.8F}));
    CHECK(std::fabs(sd[0].at(0) - std::sqrt(0.06)) < 1e-7);
}

TEST_CASE("entropy of 0.9 is about 0.4690") {
    CHECK(std::fabs(binary_entropy(0.9) - 0.4690) < 5e-5);
}

TEST_CASE("overlap needs two channels at the threshold") {
    auto overlap_of = [](std::vector<float> channels) {
        std::vector<VolumeGrid> ch;
        for (float p : channels) ch.push_back(floats({p}));
        return overlap_map(ch, 0.5).at(0);
    };
    CHECK(overlap_of({0.6F, 0.7F, 0.1F}) == 1);
    CHECK(overlap_of({0.6F, 0.4F, 0.4F}) == 0);
}

TEST_CASE("confident agreeing members with disjoint organs give an empty map") {
    const auto g = line(4);
    const SoftPrediction m("m", {VolumeGrid::from_values(g, std::vector<float>{1, 0, 0, 0}),
                                 VolumeGrid::from_values(g, std::vector<float>{0, 1, 0, 0})});
    const auto map = build_attention(PredictionSet("c", {m, m, m}));
    CHECK(map.total_mm3 == 0.0);
    CHECK(count_set(map.union_mask) == 0);
}

TEST_CASE("a 20-voxel disagreement blob is exactly the attention") {
    const auto g = Geometry::make({8, 8, 8}, {1, 1, 1});
    std::vector<float> a(g.voxel_count(), 0.0F), b(g.voxel_count(), 0.0F);
    std::vector<std::uint8_t> blob(g.voxel_count(), 0);
    for (std::int64_t k = 2; k < 4; ++k) {
        for (std::int64_t j = 2; j < 4; ++j) {
            for (std::int64_t i = 2; i < 7; ++i) {
                b[g.dims.index(i, j, k)] = 1.0F;
                blob[g.dims.index(i, j, k)] = 1;
            }
        }
    }
    const PredictionSet set("c", {SoftPrediction("m0", {VolumeGrid::from_values(g, a)}),
                                  SoftPrediction("m1", {VolumeGrid::from_values(g, b)})});
    const auto map = build_attention(set);
    CHECK(map.union_mask == VolumeGrid::from_values(g, blob));
    CHECK(map.total_mm3 == 20.0);
}

TEST_CASE("a single disagreeing voxel is removed by a 2-voxel speckle filter") {
    const auto g = Geometry::make({3, 3, 3}, {});
    std::vector<float> b(27, 0.0F);
    b[13] = 1.0F;
    const PredictionSet set("c", {SoftPrediction("m0", {VolumeGrid::filled<float>(g, 0.0F)}),
                                  SoftPrediction("m1", {VolumeGrid::from_values(g, b)})});
    DetectionConfig cfg;
    cfg.min_component_voxels = 2;
    const auto map = build_attention(set, cfg);
    CHECK(map.total_mm3 == 0.0);
    CHECK(map.components.empty());
}

}  // TEST_SUITE

TEST_SUITE("components") {

TEST_CASE("empty mask has no components and a solid cube has one") {
    const auto g = Geometry::make({3, 3, 3}, {});
    CHECK(connected_components(VolumeGrid::filled<std::uint8_t>(g, 0)).count() == 0);
    const auto cube = connected_components(VolumeGrid::filled<std::uint8_t>(g, 1));
    REQUIRE(cube.count() == 1);
    CHECK(cube.components[0].voxel_count == 27);
}

TEST_CASE("corner-touching voxels: one component at 26, two at 6") {
    const auto g = Geometry::make({2, 2, 2}, {});
    const auto m = voxels(g, {{{0, 0, 0}}, {{1, 1, 1}}});
    CHECK(connected_components(m, Connectivity::Vertex).count() == 1);
    CHECK(connected_components(m, Connectivity::Face).count() == 2);
}

}  // TEST_SUITE

TEST_SUITE("metrics") {

TEST_CASE("error region of {A,B} against {B,C} is {A,C}") {
    const auto g = line(3);
    CHECK(error_region(bytes(g, {1, 1, 0}), bytes(g, {0, 1, 1})) == bytes(g, {1, 0, 1}));
    CHECK(error_region(bytes(g, {0, 0, 0}), bytes(g, {0, 1, 1})) == bytes(g, {0, 1, 1}));
}

TEST_CASE("attention equal to the error blob scores one and one") {
    const auto g = line(5);
    const auto blob = bytes(g, {0, 1, 1, 0, 0});
    const auto m = componentwise_metrics(blob, blob);
    CHECK(m.sensitivity == 1.0);
    CHECK(m.precision == 1.0);
}

TEST_CASE("covering one of two error blobs gives sensitivity 0.5") {
    const auto g = line(7);
    const auto m = componentwise_metrics(bytes(g, {1, 1, 0, 0, 0, 0, 0}), bytes(g, {0, 1, 0, 0, 0, 1, 1}));
    CHECK(m.sensitivity == 0.5);
    CHECK(m.counts.tp == 1);
    CHECK(m.counts.fn == 1);
}

TEST_CASE("three of four attention components touching errors give precision 0.75") {
    const auto g = line(8);
    const auto m = componentwise_metrics(bytes(g, {1, 0, 1, 0, 1, 0, 1, 0}), bytes(g, {1, 0, 1, 0, 1, 0, 0, 0}));
    CHECK(m.precision == 0.75);
    CHECK(m.counts.fp == 1);
}

TEST_CASE("dice by hand") {
    const auto g = line(6);
    CHECK(dsc(bytes(g, {1, 1, 1, 1, 0, 0}), bytes(g, {0, 0, 1, 1, 1, 1})) == 0.5);
    CHECK(dsc(bytes(g, {1, 1, 0, 0, 0, 0}), bytes(g, {0, 0, 0, 0, 1, 1})) == 0.0);
    CHECK(dsc(bytes(g, {1, 1, 0, 0, 0, 0}), bytes(g, {1, 1, 0, 0, 0, 0})) == 1.0);
}

TEST_CASE("dsc matrix of identical and disjoint labellings") {
    const auto g = line(4);
    const auto labels = OrganLabelMap::numbered(1);
    const LabelVolume a(bytes(g, {1, 1, 0, 0}), labels);
    const LabelVolume b(bytes(g, {0, 0, 1, 1}), labels);
    const auto same = dsc_matrix(std::vector<LabelVolume>{a, a, a}, 1, {"x", "y", "z"});
    for (double v : same.values) CHECK(v == 1.0);
    const auto apart = dsc_matrix(std::vector<LabelVolume>{a, b}, 1, {"a", "b"});
    CHECK(apart.at(0, 1) == 0.0);
    CHECK(apart.at(1, 0) == 0.0);
}

TEST_CASE("false positive scan of clean predictions and an empty list") {
    const auto g = line(3);
    const std::vector<CaseMask> clean{{"a", bytes(g, {0, 0, 0})}, {"b", bytes(g, {0, 0, 0})}};
    const auto scan = false_positive_scan(clean);
    CHECK(scan.false_positive_rate == 0.0);
    CHECK(scan.total_component_count == 0);
    CHECK_THROWS_AS(false_positive_scan({}), DomainError);
}

}  // TEST_SUITE

TEST_SUITE("ensemble") {

TEST_CASE("mean of member probabilities") {
    CHECK(std::fabs(mean_soft(one_voxel({0.2F, 0.6F}))[0].at(0) - 0.4) < 1e-7);
    CHECK(std::fabs(mean_soft(one_voxel({0.0F, 0.0F, 1.0F}))[0].at(0) - 1.0 / 3.0) < 1e-7);
    CHECK(mean_soft(one_voxel({0.7F}))[0].at(0) == static_cast<double>(0.7F));
}

TEST_CASE("two of three confident votes carry the label") {
    CHECK(ensemble_label(one_voxel({1.0F, 1.0F, 0.0F}), 0.5).codes()[0] == 1);
    CHECK(ensemble_label(one_voxel({1.0F, 0.0F, 0.0F}), 0.5).codes()[0] == 0);
}

}  // TEST_SUITE
