#include <doctest.h>

#include <cmath>
#include <random>

#include "infiltra/stain.hpp"

using namespace infiltra;

namespace {

OdVector scale(const OdVector& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

OdVector combine(const StainMatrix& m, const OdVector& c) {
    OdVector od{};
    for (std::size_t i = 0; i < 3; ++i)
        od[i] = c[0] * m.row(0)[i] + c[1] * m.row(1)[i] + c[2] * m.row(2)[i];
    return od;
}

StainMatrix random_matrix(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (;;) {
        try {
            return StainMatrix::from_rows({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)},
                                          OdVector{u(rng), u(rng), u(rng)});
        } catch (const Error&) {
            // nearly collinear draw, try again
        }
    }
}

}  // namespace

TEST_CASE("white transmits fully and maps to zero optical density") {
    const OdVector od = rgb_to_od({255, 255, 255});
    CHECK(od[0] == 0.0);
    CHECK(od[1] == 0.0);
    CHECK(od[2] == 0.0);
}

TEST_CASE("optical density follows -log10(I/255)") {
    const OdVector od = rgb_to_od({25, 255, 255});
    CHECK(od[0] == doctest::Approx(-std::log10(25.0 / 255.0)).epsilon(1e-12));
    CHECK(od[0] == doctest::Approx(1.0086).epsilon(1e-4));
    CHECK(od[1] == 0.0);
    CHECK(od[2] == 0.0);
}

TEST_CASE("black clamps at 0.5 before the log") {
    const OdVector od = rgb_to_od({0, 0, 0});
    const double expect = -std::log10(0.5 / 255.0);
    CHECK(od[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(od[0] == doctest::Approx(2.7076).epsilon(1e-4));
    CHECK(od[1] == od[0]);
    CHECK(od[2] == od[0]);
}

TEST_CASE("optical density decreases monotonically in intensity") {
    double prev = rgb_to_od({0, 0, 0})[0];
    for (int i = 1; i < 256; ++i) {
        const double cur = rgb_to_od({static_cast<std::uint8_t>(i), 0, 0})[0];
        CHECK(cur <= prev);
        CHECK(cur >= 0.0);
        prev = cur;
    }
}

TEST_CASE("zero OD deconvolves to zero concentrations") {
    const OdVector c = deconvolve_od({0, 0, 0}, StainMatrix::h_dab());
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.0);
    CHECK(c[2] == 0.0);
}

TEST_CASE("identity basis returns the OD itself") {
    const StainMatrix identity = StainMatrix::from_rows({1, 0, 0}, {0, 1, 0}, OdVector{0, 0, 1});
    const OdVector c = deconvolve_od({0.3, 0.1, 0.0}, identity);
    CHECK(c[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a pure stain multiple recovers its coefficient") {
    const StainMatrix& m = StainMatrix::h_dab();
    const OdVector c = deconvolve_od(scale(m.row(1), 0.2), m);
    CHECK(c[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(c[1] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(c[2] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("deconvolution round trip over random bases and concentrations") {
    std::mt19937 rng(20240618);
    std::uniform_real_distribution<double> conc(0.0, 2.0);
    for (int iter = 0; iter < 1000; ++iter) {
        const StainMatrix m = random_matrix(rng);
        const OdVector c{conc(rng), conc(rng), conc(rng)};
        const OdVector back = deconvolve_od(combine(m, c), m);
        for (std::size_t i = 0; i < 3; ++i) REQUIRE(std::abs(back[i] - c[i]) < 1e-6);
    }
}

TEST_CASE("stain rows are unit norm and the matrix invertible") {
    const StainMatrix& m = StainMatrix::h_dab();
    for (std::size_t r = 0; r < 3; ++r) {
        const OdVector& row = m.row(r);
        const double norm = std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
        CHECK(std::abs(norm - 1.0) < 1e-9);
    }
    CHECK(std::abs(m.det()) > 1e-12);
}

TEST_CASE("parallel stain rows are rejected") {
    CHECK_THROWS_WITH_AS(StainMatrix::from_rows({1, 0, 0}, {1, 0, 0}),
                         doctest::Contains("SingularStainMatrix"), Error);
    CHECK_THROWS_AS(StainMatrix::from_rows({0.5, 0.5, 0}, {0.25, 0.25, 0},
                                           OdVector{0, 0, 1}),
                    Error);
}

namespace {

SlideMeta ihc_meta(std::size_t w, std::size_t h) { return SlideMeta{0.454, w, h, Stain::IhcCd3}; }

// Transmitted intensity of a pure DAB concentration, rounded to 8-bit.
Rgb8 dab_pixel(double concentration) {
    const OdVector od = {concentration * StainMatrix::h_dab().row(1)[0],
                         concentration * StainMatrix::h_dab().row(1)[1],
                         concentration * StainMatrix::h_dab().row(1)[2]};
    auto to_intensity = [](double d) {
        return static_cast<std::uint8_t>(std::lround(255.0 * std::pow(10.0, -d)));
    };
    return Rgb8{to_intensity(od[0]), to_intensity(od[1]), to_intensity(od[2])};
}

}  // namespace

TEST_CASE("an all-white image yields an all-negative mask") {
    RgbImage image(8, 8, Rgb8{255, 255, 255});
    const LymphocyteMask mask = dab_lymphocyte_mask(image, ihc_meta(8, 8), StainMatrix::h_dab());
    for (std::size_t i = 0; i < mask.mask.size(); ++i) CHECK(mask.mask[i] == 0);
}

TEST_CASE("a uniform strong DAB image yields an all-positive mask") {
    RgbImage image(8, 8, dab_pixel(0.5));
    const LymphocyteMask mask =
        dab_lymphocyte_mask(image, ihc_meta(8, 8), StainMatrix::h_dab(), 0.095, 12);
    for (std::size_t i = 0; i < mask.mask.size(); ++i) CHECK(mask.mask[i] != 0);
}

TEST_CASE("OD at 0.2 times the DAB row clears the 0.095 threshold") {
    // 8-bit quantization keeps the recovered concentration near 0.2
    RgbImage image(4, 4, dab_pixel(0.2));
    const OdVector od = rgb_to_od(dab_pixel(0.2));
    const double recovered = deconvolve_od(od, StainMatrix::h_dab())[1];
    CHECK(recovered == doctest::Approx(0.2).epsilon(0.05));
    CHECK(recovered > 0.095);
    const LymphocyteMask mask =
        dab_lymphocyte_mask(image, ihc_meta(4, 4), StainMatrix::h_dab(), 0.095, 0);
    for (std::size_t i = 0; i < mask.mask.size(); ++i) CHECK(mask.mask[i] != 0);
}

TEST_CASE("small positive components fall to the area opening") {
    RgbImage image(8, 8, Rgb8{255, 255, 255});
    image.at(2, 2) = dab_pixel(0.5);
    image.at(3, 2) = dab_pixel(0.5);
    const LymphocyteMask kept =
        dab_lymphocyte_mask(image, ihc_meta(8, 8), StainMatrix::h_dab(), 0.095, 2);
    CHECK(kept.mask.at(2, 2) != 0);
    const LymphocyteMask removed =
        dab_lymphocyte_mask(image, ihc_meta(8, 8), StainMatrix::h_dab(), 0.095, 4);
    for (std::size_t i = 0; i < removed.mask.size(); ++i) CHECK(removed.mask[i] == 0);
}

TEST_CASE("threshold at +inf empties the mask, -inf with area 0 fills it") {
    std::mt19937 rng(5);
    RgbImage image(16, 16);
    for (std::size_t i = 0; i < image.size(); ++i)
        image[i] = Rgb8{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                        static_cast<std::uint8_t>(rng())};
    const double inf = std::numeric_limits<double>::infinity();
    const LymphocyteMask none =
        dab_lymphocyte_mask(image, ihc_meta(16, 16), StainMatrix::h_dab(), inf, 0);
    const LymphocyteMask all =
        dab_lymphocyte_mask(image, ihc_meta(16, 16), StainMatrix::h_dab(), -inf, 0);
    for (std::size_t i = 0; i < none.mask.size(); ++i) {
        CHECK(none.mask[i] == 0);
        CHECK(all.mask[i] != 0);
    }
}

TEST_CASE("raising min_area_px never adds positive pixels") {
    std::mt19937 rng(17);
    RgbImage image(32, 32, Rgb8{255, 255, 255});
    for (std::size_t i = 0; i < image.size(); ++i)
        if (rng() % 3 == 0) image[i] = dab_pixel(0.3);
    const SlideMeta meta = ihc_meta(32, 32);
    LymphocyteMask prev = dab_lymphocyte_mask(image, meta, StainMatrix::h_dab(), 0.095, 0);
    for (std::int64_t area : {1, 2, 4, 8, 16, 64}) {
        const LymphocyteMask cur =
            dab_lymphocyte_mask(image, meta, StainMatrix::h_dab(), 0.095, area);
        for (std::size_t i = 0; i < cur.mask.size(); ++i) {
            if (cur.mask[i] != 0) REQUIRE(prev.mask[i] != 0);
        }
        prev = cur;
    }
}

TEST_CASE("image dimensions must match the slide meta") {
    RgbImage image(4, 4);
    CHECK_THROWS_WITH_AS(dab_lymphocyte_mask(image, ihc_meta(5, 4), StainMatrix::h_dab()),
                         doctest::Contains("ShapeMismatch"), Error);
}
