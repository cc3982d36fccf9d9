#include <doctest.h>

#include "generators.hpp"
#include "labelqa/metrics.hpp"
#include "oracles.hpp"

using namespace labelqa;
using labelqa::testing::Rng;

TEST_SUITE("metrics") {

TEST_CASE("component metrics match the pairwise flood-fill oracle") {
    Rng rng(71);
    int undefined_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto att = testing::random_mask(rng, g, rng.coin(0.1) ? 0.0 : 0.3 * rng.uniform());
        const auto err = testing::random_mask(rng, g, rng.coin(0.1) ? 0.0 : 0.3 * rng.uniform());
        const int conn = static_cast<int>(rng.pick(std::vector<std::int64_t>{6, 18, 26}));
        const auto got = componentwise_metrics(att, err, connectivity_from_int(conn));
        const auto want = oracle::component_score(att, err, conn);
        CHECK(got.sensitivity == want.sensitivity);
        CHECK(got.precision == want.precision);
        CHECK(got.counts.tp == want.tp);
        CHECK(got.counts.fp == want.fp);
        CHECK(got.counts.fn == want.fn);
        undefined_seen += !got.sensitivity.has_value() || !got.precision.has_value();
    }
    CHECK(undefined_seen > 0);
}

TEST_CASE("undefined ratios stay undefined") {
    const auto g = Geometry::make({3, 3, 3}, {});
    const auto empty = VolumeGrid::filled<std::uint8_t>(g, 0);
    const auto full = VolumeGrid::filled<std::uint8_t>(g, 1);
    auto m = componentwise_metrics(empty, empty);
    CHECK_FALSE(m.sensitivity.has_value());
    CHECK_FALSE(m.precision.has_value());
    m = componentwise_metrics(full, empty);
    CHECK_FALSE(m.sensitivity.has_value());
    CHECK(m.precision == 0.0);
    m = componentwise_metrics(empty, full);
    CHECK(m.sensitivity == 0.0);
    CHECK_FALSE(m.precision.has_value());
}

TEST_CASE("dsc: symmetric, bounded, one on identical masks") {
    Rng rng(72);
    for (int trial = 0; trial < 300; ++trial) {
        const auto g = testing::random_geometry(rng, 7);
        const auto a = testing::random_mask(rng, g, rng.uniform());
        const auto b = testing::random_mask(rng, g, rng.uniform());
        const double ab = dsc(a, b);
        CHECK(ab == dsc(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(dsc(a, a) == 1.0);
        CHECK(ab == oracle::dice(oracle::bytes_of(a), oracle::bytes_of(b)));
        if (!(a == b)) CHECK(ab < 1.0);
    }
    const auto g = Geometry::make({2, 2, 2}, {});
    CHECK(dsc(VolumeGrid::filled<std::uint8_t>(g, 0), VolumeGrid::filled<std::uint8_t>(g, 0)) == 1.0);
}

TEST_CASE("error region is the symmetric difference") {
    Rng rng(73);
    for (int trial = 0; trial < 100; ++trial) {
        const auto g = testing::random_geometry(rng, 6);
        const auto a = testing::random_mask(rng, g, 0.4);
        const auto b = testing::random_mask(rng, g, 0.4);
        CHECK(error_region(a, a) == VolumeGrid::filled<std::uint8_t>(g, 0));
        CHECK(error_region(a, b) == error_region(b, a));
        CHECK(error_region(a, b) == mask_xor(a, b));
    }
}

TEST_CASE("dsc matrix is symmetric with unit diagonal") {
    Rng rng(74);
    const auto g = testing::random_geometry(rng, 6);
    std::vector<LabelVolume> labelings;
    for (int i = 0; i < 5; ++i) labelings.push_back(testing::random_labels(rng, g, 3));
    const auto m = dsc_matrix(labelings, 2, {"a", "b", "c", "d", "e"});
    REQUIRE(m.values.size() == 25);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(m.at(i, i) == 1.0);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(m.at(i, j) == m.at(j, i));
            CHECK(m.at(i, j) == dsc(labelings[i].organ_mask(2), labelings[j].organ_mask(2)));
        }
    }
    CHECK_THROWS_AS(dsc_matrix(labelings, 2, {"a"}), DomainError);
}

TEST_CASE("mean organ dsc averages organs present in either labelling") {
    const auto g = Geometry::make({4, 1, 1}, {});
    const auto labels = OrganLabelMap::numbered(3);
    const LabelVolume a(VolumeGrid::from_values(g, std::vector<std::uint8_t>{1, 1, 2, 0}), labels);
    const LabelVolume b(VolumeGrid::from_values(g, std::vector<std::uint8_t>{1, 0, 0, 0}), labels);
    // organ 1: 2*1/(2+1); organ 2: 0; organ 3 absent from both.
    CHECK(mean_organ_dsc(a, b) == doctest::Approx((2.0 / 3.0 + 0.0) / 2.0).epsilon(1e-15));
    const LabelVolume bg(VolumeGrid::filled<std::uint8_t>(g, 0), labels);
    CHECK(mean_organ_dsc(bg, bg) == 1.0);
}

TEST_CASE("false positive scan counts flagged cases and components") {
    const auto g = Geometry::make({5, 5, 5}, {});
    std::vector<std::uint8_t> two(125, 0);
    two[g.dims.index(0, 0, 0)] = 1;
    two[g.dims.index(4, 4, 4)] = 1;
    const std::vector<CaseMask> masks{{"a", VolumeGrid::filled<std::uint8_t>(g, 0)},
                                      {"b", VolumeGrid::from_values(g, two)},
                                      {"c", VolumeGrid::filled<std::uint8_t>(g, 0)},
                                      {"d", VolumeGrid::filled<std::uint8_t>(g, 0)}};
    const auto scan = false_positive_scan(masks);
    CHECK(scan.case_count == 4);
    CHECK(scan.flagged_case_count == 1);
    CHECK(scan.total_component_count == 2);
    CHECK(scan.false_positive_rate == 0.25);
    CHECK(scan.cases[1].voxels == 2);
}

TEST_CASE("evaluate_case scores each organ against its own error region") {
    const auto g = Geometry::make({6, 1, 1}, {});
    const auto labels = OrganLabelMap::numbered(2);
    const LabelVolume truth(VolumeGrid::from_values(g, std::vector<std::uint8_t>{1, 1, 0, 2, 2, 0}), labels);
    const LabelVolume pseudo(VolumeGrid::from_values(g, std::vector<std::uint8_t>{1, 0, 0, 2, 2, 2}), labels);
    const std::vector<VolumeGrid> att{VolumeGrid::from_values(g, std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0}),
                                      VolumeGrid::from_values(g, std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0})};
    const auto rows = evaluate_case("c", att, pseudo, truth);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].organ == "organ1");
    CHECK(rows[0].component.sensitivity == 1.0);
    CHECK(rows[0].component.precision == 1.0);
    CHECK(rows[1].component.sensitivity == 0.0);
    CHECK(rows[1].component.precision == 0.0);
    CHECK(rows[1].dsc == doctest::Approx(0.8));

    MetricsReport report;
    report.rows = rows;
    CHECK(report.mean_sensitivity("organ1") == 1.0);
    CHECK_FALSE(report.mean_sensitivity("organ9").has_value());
}

}  // TEST_SUITE
