#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "labelqa/detect.hpp"
#include "labelqa/ensemble.hpp"
#include "oracles.hpp"

using namespace labelqa;
using labelqa::testing::Rng;

namespace {

PredictionSet two_voxel_set(std::vector<std::vector<float>> member_values) {
    const auto g = Geometry::make({static_cast<std::int64_t>(member_values.front().size()), 1, 1}, {});
    std::vector<SoftPrediction> members;
    for (std::size_t m = 0; m < member_values.size(); ++m) {
        members.emplace_back("m" + std::to_string(m),
                             std::vector<VolumeGrid>{VolumeGrid::from_values(g, member_values[m])});
    }
    return PredictionSet("c", std::move(members));
}

PredictionSet permuted(const PredictionSet& set, Rng& rng) {
    std::vector<SoftPrediction> members(set.members().begin(), set.members().end());
    std::shuffle(members.begin(), members.end(), rng.engine());
    return PredictionSet(set.case_id(), std::move(members));
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("entropy closed forms") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    for (double p = 0.0; p <= 1.0; p += 1.0 / 64) {
        CHECK(std::fabs(binary_entropy(p) - binary_entropy(1.0 - p)) <= 1e-12);
        CHECK(std::fabs(binary_entropy(p) - oracle::entropy_bits(p)) <= 1e-12);
    }
    CHECK_THROWS_AS(binary_entropy(1.5), DomainError);
}

TEST_CASE("inconsistency of (0, 1) with two members is one half") {
    const auto sd = inconsistency_map(two_voxel_set({{0.0F, 0.3F}, {1.0F, 0.3F}}));
    REQUIRE(sd.size() == 1);
    CHECK(std::fabs(sd[0].at(0) - 0.5) <= 1e-12);
    CHECK(sd[0].at(1) == 0.0);
    CHECK_THROWS_AS(inconsistency_map(two_voxel_set({{0.0F}})), DomainError);
}

TEST_CASE("inconsistency matches the two-pass formula and ignores member order") {
    Rng rng(51);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = testing::random_geometry(rng, 5);
        const auto k = static_cast<std::size_t>(rng.uniform_int(2, 5));
        const auto set = testing::random_prediction_set(rng, g, k, 2);
        const auto sd = inconsistency_map(set);
        CHECK(inconsistency_map(permuted(set, rng)) == sd);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t v = 0; v < g.voxel_count(); ++v) {
                std::vector<double> xs;
                for (const auto& m : set.members()) xs.push_back(m.channels()[c].values<float>()[v]);
                CHECK(sd[c].at(v) == static_cast<double>(static_cast<float>(oracle::population_std(xs))));
            }
        }
    }
}

TEST_CASE("uncertainty is symmetric under p -> 1 - p") {
    Rng rng(52);
    const auto g = testing::random_geometry(rng, 6);
    std::vector<float> p(g.voxel_count()), q(g.voxel_count());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = testing::lattice_probability(rng);
        q[i] = 1.0F - p[i];
    }
    const std::vector<VolumeGrid> a{VolumeGrid::from_values(g, p)};
    const std::vector<VolumeGrid> b{VolumeGrid::from_values(g, q)};
    CHECK(uncertainty_map(a) == uncertainty_map(b));
}

TEST_CASE("overlap marks voxels claimed by two or more channels") {
    const auto g = Geometry::make({4, 1, 1}, {});
    const std::vector<VolumeGrid> ch{VolumeGrid::from_values(g, std::vector<float>{0.6F, 0.6F, 0.1F, 0.5F}),
                                     VolumeGrid::from_values(g, std::vector<float>{0.7F, 0.2F, 0.9F, 0.5F})};
    const auto o = overlap_map(ch, 0.5);
    CHECK(o.at(0) == 1);
    CHECK(o.at(1) == 0);
    CHECK(o.at(2) == 0);
    CHECK(o.at(3) == 1);
}

TEST_CASE("union equals the brute-force OR of recomputed criteria") {
    Rng rng(53);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto set = testing::random_prediction_set(rng, g, static_cast<std::size_t>(rng.uniform_int(2, 3)),
                                                        static_cast<std::size_t>(rng.uniform_int(1, 3)));
        DetectionConfig cfg;
        cfg.tau_inconsistency = rng.pick(std::vector<double>{0.1, 0.2, 0.3});
        cfg.tau_uncertainty = rng.pick(std::vector<double>{0.5, 0.7, 0.9});
        const auto map = build_attention(set, cfg);
        const auto expected = oracle::attention_union(set, cfg.tau_inconsistency, cfg.tau_uncertainty, 0.5);
        CHECK(oracle::bytes_of(map.union_mask) == expected);
        CHECK(map.union_mask ==
              mask_or(mask_or(map.inconsistency_mask, map.uncertainty_mask), map.overlap_mask));
        CHECK(map.union_mask.geometry() == g);
    }
}

TEST_CASE("per-organ masks partition the union's organ sources and sizes add up") {
    Rng rng(54);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto set = testing::random_prediction_set(rng, g, 3, 3);
        const auto map = build_attention(set);
        VolumeGrid any = VolumeGrid::filled<std::uint8_t>(g, 0);
        double sum = 0.0;
        for (std::size_t c = 0; c < map.per_organ_masks.size(); ++c) {
            any = mask_or(any, map.per_organ_masks[c]);
            CHECK(map.organ_mm3[c] == physical_volume(map.per_organ_masks[c]));
            sum += map.organ_mm3[c];
        }
        CHECK(mask_andnot(any, map.union_mask) == VolumeGrid::filled<std::uint8_t>(g, 0));
        CHECK(map.total_mm3 == physical_volume(map.union_mask));
        CHECK(map.total_mm3 <= sum + 1e-9);
    }
}

TEST_CASE("lowering thresholds never shrinks the union") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto set = testing::random_prediction_set(rng, g, 3, 2);
        DetectionConfig hi;
        hi.tau_inconsistency = 0.3;
        hi.tau_uncertainty = 0.9;
        DetectionConfig lo = hi;
        lo.tau_inconsistency = 0.05 + 0.25 * rng.uniform();
        lo.tau_uncertainty = 0.05 + 0.85 * rng.uniform();
        const auto big = build_attention(set, lo).union_mask;
        const auto small = build_attention(set, hi).union_mask;
        CHECK(mask_andnot(small, big) == VolumeGrid::filled<std::uint8_t>(g, 0));
    }
}

TEST_CASE("attention does not depend on member order") {
    Rng rng(56);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto set = testing::random_prediction_set(rng, g, 3, 2);
        const auto a = build_attention(set);
        const auto b = build_attention(permuted(set, rng));
        CHECK(a.union_mask == b.union_mask);
        CHECK(a.per_organ_masks == b.per_organ_masks);
    }
}

TEST_CASE("speckle filter drops small components and keeps the union identity") {
    Rng rng(57);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = testing::random_geometry(rng, 7);
        const auto set = testing::random_prediction_set(rng, g, 2, 2);
        DetectionConfig cfg;
        cfg.min_component_voxels = 3;
        cfg.connectivity = Connectivity::Face;
        const auto map = build_attention(set, cfg);
        for (const auto& c : map.components) CHECK(c.voxel_count >= 3);
        CHECK(map.union_mask ==
              mask_or(mask_or(map.inconsistency_mask, map.uncertainty_mask), map.overlap_mask));
        const auto raw = build_attention(set).union_mask;
        CHECK(map.union_mask == remove_small_components(raw, 3, Connectivity::Face));
    }
}

TEST_CASE("configuration ranges are enforced") {
    DetectionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tau_inconsistency = 0.6;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.tau_uncertainty = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.binarize_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

}  // TEST_SUITE

TEST_SUITE("ensemble") {

TEST_CASE("mean is bounded by members and ignores member order") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = testing::random_geometry(rng, 5);
        std::vector<SoftPrediction> members;
        for (std::int64_t m = rng.uniform_int(1, 5); m > 0; --m) {
            members.emplace_back("m" + std::to_string(m), std::vector<VolumeGrid>{testing::uniform_channel(rng, g),
                                                                                 testing::uniform_channel(rng, g)});
        }
        const PredictionSet set("c", std::move(members));
        const auto mean = mean_soft(set);
        CHECK(mean_soft(permuted(set, rng)) == mean);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t v = 0; v < g.voxel_count(); ++v) {
                double lo = 1.0, hi = 0.0;
                for (const auto& m : set.members()) {
                    lo = std::min(lo, m.channels()[c].at(v));
                    hi = std::max(hi, m.channels()[c].at(v));
                }
                CHECK(mean[c].at(v) >= lo);
                CHECK(mean[c].at(v) <= hi);
            }
        }
    }
}

TEST_CASE("identical members give the single-member labels") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        std::vector<VolumeGrid> ch;
        for (int c = 0; c < 3; ++c) ch.push_back(testing::uniform_channel(rng, g));
        const SoftPrediction one("m", ch);
        const auto k = static_cast<std::size_t>(rng.uniform_int(1, 4));
        const PredictionSet set("c", std::vector<SoftPrediction>(k, one));
        CHECK(ensemble_label(set, 0.5) == labels_from_soft(ch, 0.5));
    }
}

TEST_CASE("nine channels use the standard organ names") {
    CHECK(default_labels_for(9) == OrganLabelMap::standard());
    CHECK(default_labels_for(2) == OrganLabelMap::numbered(2));
}

}  // TEST_SUITE
