#include <doctest.h>

#include <cmath>
#include <random>

#include "infiltra/distance.hpp"
#include "infiltra/profile.hpp"

using namespace infiltra;

namespace {

SignedDistanceMap map_from(const std::vector<double>& values, std::size_t w, std::size_t h,
                           double mpp = 1.0) {
    SignedDistanceMap d{SlideMeta{mpp, w, h, Stain::HE}, Grid<double>(w, h)};
    for (std::size_t i = 0; i < values.size(); ++i) d.dist_um[i] = values[i];
    return d;
}

LymphocyteMask mask_from(const std::vector<int>& values, std::size_t w, std::size_t h,
                         double mpp = 1.0) {
    LymphocyteMask m{SlideMeta{mpp, w, h, Stain::HE}, MaskGrid(w, h)};
    for (std::size_t i = 0; i < values.size(); ++i) m.mask[i] = values[i] ? 1 : 0;
    return m;
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// A curve with given density values on contiguous 10 um bins.
InfiltrationCurve curve_of(double first_edge, std::initializer_list<double> densities) {
    InfiltrationCurve c;
    c.bin_width_um = 10.0;
    c.first_edge_um = first_edge;
    for (double d : densities) {
        c.density.push_back(d);
        c.tissue_px.push_back(100);
        c.lymph_px.push_back(static_cast<std::int64_t>(d * 100));
    }
    return c;
}

}  // namespace

TEST_CASE("an empty lymphocyte mask gives zero densities over real tissue") {
    const auto dist = map_from({2.0, 1.0, -1.0, -2.0}, 4, 1);
    const auto lymph = mask_from({0, 0, 0, 0}, 4, 1);
    const InfiltrationCurve curve = infiltration_curve(dist, lymph, 1.0);
    for (std::size_t i = 0; i < curve.bins(); ++i) CHECK(curve.density[i] == 0.0);
    std::int64_t tissue = 0;
    for (std::int64_t t : curve.tissue_px) tissue += t;
    CHECK(tissue == 4);
}

TEST_CASE("hand-enumerated bin assignment on the 1x4 strip") {
    const auto dist = map_from({2.0, 1.0, -1.0, -2.0}, 4, 1);
    const auto lymph = mask_from({1, 0, 0, 1}, 4, 1);
    const InfiltrationCurve curve = infiltration_curve(dist, lymph, 1.0);
    // edges -2..3 -> bins [-2,-1) [-1,0) [0,1) [1,2) [2,3)
    REQUIRE(curve.bins() == 5);
    CHECK(curve.first_edge_um == -2.0);
    CHECK(curve.density[0] == 1.0);   // d = -2
    CHECK(curve.density[1] == 0.0);   // d = -1
    CHECK(curve.tissue_px[2] == 0);   // no pixel in [0,1)
    CHECK(curve.density[3] == 0.0);   // d = +1
    CHECK(curve.density[4] == 1.0);   // d = +2
}

TEST_CASE("a checker-stride mask yields constant density 0.25") {
    const std::size_t w = 64, h = 16;
    SignedDistanceMap dist{SlideMeta{1.0, w, h, Stain::HE}, Grid<double>(w, h)};
    LymphocyteMask lymph{SlideMeta{1.0, w, h, Stain::HE}, MaskGrid(w, h)};
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            dist.dist_um.at(x, y) = static_cast<double>(x) + 0.25;
            lymph.mask.at(x, y) = (x + y) % 4 == 0 ? 1 : 0;  // 4 of 16 per column
        }
    }
    const InfiltrationCurve curve = infiltration_curve(dist, lymph, 1.0);
    for (std::size_t i = 0; i < curve.bins(); ++i) {
        REQUIRE(curve.tissue_px[i] == 16);
        CHECK(curve.density[i] == doctest::Approx(0.25));
    }
}

TEST_CASE("lymphocytes outside defined distances are ignored") {
    const auto dist = map_from({kNan, 1.0, kNan}, 3, 1);
    const auto lymph = mask_from({1, 1, 1}, 3, 1);
    const InfiltrationCurve curve = infiltration_curve(dist, lymph, 1.0);
    std::int64_t total = 0;
    for (std::int64_t l : curve.lymph_px) total += l;
    CHECK(total == 1);
}

TEST_CASE("mass conservation and partition over random data") {
    std::mt19937 rng(20240620);
    for (int iter = 0; iter < 10; ++iter) {
        const std::size_t w = 16 + rng() % 49;
        const std::size_t h = 16 + rng() % 49;
        SignedDistanceMap dist{SlideMeta{0.454, w, h, Stain::HE}, Grid<double>(w, h)};
        LymphocyteMask lymph{SlideMeta{0.454, w, h, Stain::HE}, MaskGrid(w, h)};
        std::size_t defined = 0, lymph_defined = 0;
        for (std::size_t i = 0; i < dist.dist_um.size(); ++i) {
            const bool has = rng() % 5 != 0;
            dist.dist_um[i] =
                has ? (static_cast<double>(rng() % 2000) - 1000.0) * 0.454 : kNan;
            lymph.mask[i] = rng() % 3 == 0;
            defined += has;
            lymph_defined += has && lymph.mask[i];
        }
        if (defined == 0) continue;
        const InfiltrationCurve curve = infiltration_curve(dist, lymph);
        std::int64_t tissue_sum = 0, lymph_sum = 0;
        for (std::size_t i = 0; i < curve.bins(); ++i) {
            tissue_sum += curve.tissue_px[i];
            lymph_sum += curve.lymph_px[i];
            REQUIRE(curve.lymph_px[i] >= 0);
            REQUIRE(curve.lymph_px[i] <= curve.tissue_px[i]);
            REQUIRE(curve.density[i] >= 0.0);
            REQUIRE(curve.density[i] <= 1.0);
        }
        CHECK(tissue_sum == static_cast<std::int64_t>(defined));
        CHECK(lymph_sum == static_cast<std::int64_t>(lymph_defined));
    }
}

TEST_CASE("shape and degeneracy errors") {
    const auto dist = map_from({1.0, 1.0}, 2, 1);
    CHECK_THROWS_WITH_AS(infiltration_curve(dist, mask_from({0, 0, 0}, 3, 1)),
                         doctest::Contains("ShapeMismatch"), Error);
    const auto undefined = map_from({kNan, kNan}, 2, 1);
    CHECK_THROWS_WITH_AS(infiltration_curve(undefined, mask_from({0, 0}, 2, 1)),
                         doctest::Contains("DegenerateLabels"), Error);
}

TEST_CASE("a curve spanning the window copies through unchanged") {
    InfiltrationCurve c;
    c.bin_width_um = 10.0;
    c.first_edge_um = -2000.0;
    std::mt19937 rng(31);
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        c.density.push_back(static_cast<double>(rng() % 100) / 100.0);
        c.tissue_px.push_back(10);
        c.lymph_px.push_back(0);
    }
    const FixedWindowSeries window = to_fixed_window(c);
    for (std::size_t i = 0; i < kWindowBins; ++i) CHECK(window.values[i] == c.density[i]);
}

TEST_CASE("reflection padding mirrors without repeating the edge") {
    // [a,b,c] on bins [0,30) needs 200 left pads; indices near the seam read
    // window[199] = a's left neighbour reflection = b, window[198] = c.
    const InfiltrationCurve c = curve_of(0.0, {0.1, 0.2, 0.3});
    CHECK_THROWS_WITH_AS(to_fixed_window(c), doctest::Contains("InsufficientSupport"), Error);

    // wider support: [a,b,c,d,...] with 20 bins starting at -100
    InfiltrationCurve wide = curve_of(-100.0, {});
    for (int i = 0; i < 20; ++i) {
        wide.density.push_back(0.01 * static_cast<double>(i + 1));
        wide.tissue_px.push_back(50);
        wide.lymph_px.push_back(0);
    }
    CHECK_THROWS_AS(to_fixed_window(wide), Error);  // still < 190 bins of support
}

TEST_CASE("reflection indices follow the mirror rule on a just-wide-enough curve") {
    // curve covering [-2000, -2000 + 399*10) = [-2000, 1990): one right pad
    InfiltrationCurve c;
    c.bin_width_um = 10.0;
    c.first_edge_um = -2000.0;
    for (std::size_t i = 0; i < kWindowBins - 1; ++i) {
        c.density.push_back(static_cast<double>(i));
        c.tissue_px.push_back(1);
        c.lymph_px.push_back(0);
    }
    const FixedWindowSeries window = to_fixed_window(c);
    CHECK(window.values[398] == 398.0);
    CHECK(window.values[399] == 397.0);  // mirror of the missing bin

    // left padding analog
    InfiltrationCurve right;
    right.bin_width_um = 10.0;
    right.first_edge_um = -1980.0;  // first two window bins missing
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        right.density.push_back(static_cast<double>(i));
        right.tissue_px.push_back(1);
        right.lymph_px.push_back(0);
    }
    const FixedWindowSeries padded = to_fixed_window(right);
    CHECK(padded.values[0] == 2.0);  // [c,b,a,b,c] pattern
    CHECK(padded.values[1] == 1.0);
    CHECK(padded.values[2] == 0.0);
    CHECK(padded.values[3] == 1.0);
}

TEST_CASE("bins outside the window are truncated") {
    // curve covering [-2500, 2500): 500 bins, the central 400 survive
    InfiltrationCurve c;
    c.bin_width_um = 10.0;
    c.first_edge_um = -2500.0;
    for (int i = 0; i < 500; ++i) {
        c.density.push_back(static_cast<double>(i));
        c.tissue_px.push_back(1);
        c.lymph_px.push_back(0);
    }
    const FixedWindowSeries window = to_fixed_window(c);
    CHECK(window.values[0] == 50.0);
    CHECK(window.values[399] == 449.0);
}

TEST_CASE("fixed window rejects non-standard bin widths and misaligned edges") {
    InfiltrationCurve c = curve_of(0.0, {0.1, 0.2, 0.3});
    c.bin_width_um = 5.0;
    CHECK_THROWS_AS(to_fixed_window(c), Error);
    InfiltrationCurve misaligned = curve_of(3.0, {0.1, 0.2, 0.3});
    CHECK_THROWS_AS(to_fixed_window(misaligned), Error);
}
