#include <doctest.h>

#include <random>

#include "infiltra/eval.hpp"
#include "infiltra/labeling.hpp"

using namespace infiltra;

namespace {

MaskGrid mask_of(std::size_t w, std::size_t h, const std::vector<int>& values) {
    MaskGrid m(w, h);
    for (std::size_t i = 0; i < values.size(); ++i) m[i] = values[i] ? 1 : 0;
    return m;
}

MaskGrid random_mask(std::mt19937& rng, std::size_t w, std::size_t h, int fill_percent) {
    MaskGrid m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = static_cast<int>(rng() % 100) < fill_percent ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("8-connected components are labelled in raster order") {
    const MaskGrid m = mask_of(4, 3, {1, 0, 0, 1,
                                      0, 1, 0, 1,
                                      0, 0, 0, 1});
    const ComponentMap cc = connected_components(m);
    CHECK(cc.count == 2);          // diagonal pixels join component 1
    CHECK(cc.area[0] == 2);
    CHECK(cc.area[1] == 3);
    CHECK(cc.labels.at(0, 0) == 1);
    CHECK(cc.labels.at(1, 1) == 1);
    CHECK(cc.labels.at(3, 0) == 2);
}

TEST_CASE("identical masks score a perfect object dice") {
    std::mt19937 rng(20240625);
    for (int iter = 0; iter < 5; ++iter) {
        const MaskGrid m = random_mask(rng, 24, 24, 30);
        CHECK(object_level_dice(m, m) == 1.0);
    }
}

TEST_CASE("disjoint non-empty masks score zero") {
    const MaskGrid a = mask_of(4, 2, {1, 1, 0, 0, 0, 0, 0, 0});
    const MaskGrid b = mask_of(4, 2, {0, 0, 0, 1, 0, 0, 0, 1});
    CHECK(object_level_dice(a, b) == 0.0);
}

TEST_CASE("empty-mask conventions") {
    const MaskGrid empty(6, 6, 0);
    MaskGrid full(6, 6, 0);
    full.at(2, 2) = 1;
    CHECK(object_level_dice(empty, empty) == 1.0);
    CHECK(object_level_dice(full, empty) == 0.0);
    CHECK(object_level_dice(empty, full) == 0.0);
}

TEST_CASE("the 2-pixel-overlap fixture scores exactly one half") {
    // both components 4 px, overlap 2 px: dice = 2*2/(4+4) = 0.5 on each side
    const MaskGrid gt = mask_of(6, 1, {1, 1, 1, 1, 0, 0});
    const MaskGrid pred = mask_of(6, 1, {0, 0, 1, 1, 1, 1});
    CHECK(object_level_dice(pred, gt) == 0.5);
}

TEST_CASE("any single-pixel disagreement drops the score below 1") {
    std::mt19937 rng(20240630);
    for (int iter = 0; iter < 20; ++iter) {
        MaskGrid a = random_mask(rng, 16, 16, 30);
        MaskGrid b = a;
        const std::size_t flip = rng() % b.size();
        b[flip] = b[flip] ? 0 : 1;
        CHECK(object_level_dice(a, b) < 1.0);
    }
}

TEST_CASE("object dice is symmetric on random mask pairs") {
    std::mt19937 rng(20240626);
    for (int iter = 0; iter < 100; ++iter) {
        const MaskGrid a = random_mask(rng, 32, 32, 25);
        const MaskGrid b = random_mask(rng, 32, 32, 25);
        const double ab = object_level_dice(a, b);
        REQUIRE(ab == object_level_dice(b, a));
        REQUIRE(ab >= 0.0);
        REQUIRE(ab <= 1.0);
    }
}

TEST_CASE("a spurious predicted component strictly lowers the score") {
    MaskGrid gt(16, 16, 0);
    for (std::size_t y = 2; y < 6; ++y)
        for (std::size_t x = 2; x < 6; ++x) gt.at(x, y) = 1;
    MaskGrid pred = gt;
    const double clean = object_level_dice(pred, gt);
    pred.at(12, 12) = 1;  // far from everything
    const double noisy = object_level_dice(pred, gt);
    CHECK(clean == 1.0);
    CHECK(noisy < clean);
}

TEST_CASE("object dice rejects mismatched shapes") {
    CHECK_THROWS_WITH_AS(object_level_dice(MaskGrid(3, 3), MaskGrid(4, 3)),
                         doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("point ground truth: no centers, no disk") {
    const SlideMeta meta{1.0, 8, 8, Stain::HE};
    const MaskGrid m = points_to_disks({}, 3.5, meta);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == 0);
}

TEST_CASE("a sub-pixel radius marks only the center pixel") {
    const SlideMeta meta{1.0, 8, 8, Stain::HE};
    const MaskGrid m = points_to_disks({Point{4, 4}}, 0.4, meta);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < m.size(); ++i) positive += m[i] != 0;
    CHECK(positive == 1);
    CHECK(m.at(4, 4) == 1);
}

TEST_CASE("radius 2 builds the 13-pixel discrete disk") {
    const SlideMeta meta{1.0, 11, 11, Stain::HE};
    const MaskGrid m = points_to_disks({Point{5, 5}}, 2.0, meta);
    std::size_t positive = 0;
    for (std::size_t y = 0; y < 11; ++y) {
        for (std::size_t x = 0; x < 11; ++x) {
            const double dx = static_cast<double>(x) - 5.0;
            const double dy = static_cast<double>(y) - 5.0;
            const bool expect = dx * dx + dy * dy <= 4.0;
            REQUIRE((m.at(x, y) != 0) == expect);
            positive += m.at(x, y) != 0;
        }
    }
    CHECK(positive == 13);
}

TEST_CASE("radius converts through microns per pixel") {
    const SlideMeta meta{0.5, 11, 11, Stain::HE};  // 1 um = 2 px
    const MaskGrid m = points_to_disks({Point{5, 5}}, 1.0, meta);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < m.size(); ++i) positive += m[i] != 0;
    CHECK(positive == 13);  // same disk as radius 2 px
}

TEST_CASE("out-of-bounds centers are rejected") {
    const SlideMeta meta{1.0, 8, 8, Stain::HE};
    CHECK_THROWS_WITH_AS(points_to_disks({Point{9, 1}}, 1.0, meta),
                         doctest::Contains("OutOfBounds"), Error);
}

TEST_CASE("dice report averages patch scores arithmetically") {
    const ObjectDiceReport report =
        make_dice_report({PatchDice{"a", 0.5}, PatchDice{"b", 1.0}, PatchDice{"c", 0.0}});
    CHECK(report.mean_dice == doctest::Approx(0.5));
    CHECK(report.per_patch.size() == 3);
}
