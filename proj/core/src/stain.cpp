#include "infiltra/stain.hpp"

#include <cmath>

#include "infiltra/error.hpp"
#include "infiltra/labeling.hpp"
#include "infiltra/parallel.hpp"

namespace infiltra {

namespace {

constexpr double kBackgroundIntensity = 255.0;
constexpr double kIntensityClamp = 0.5;
constexpr double kSingularTolerance = 1e-12;

OdVector normalized(const OdVector& v) {
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw Error("SingularStainMatrix", "stain vector has zero or non-finite norm");
    return {v[0] / norm, v[1] / norm, v[2] / norm};
}

OdVector cross(const OdVector& a, const OdVector& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double det3(const std::array<OdVector, 3>& r) {
    return r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
           r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
           r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
}

}  // namespace

StainMatrix StainMatrix::from_rows(const OdVector& hematoxylin, const OdVector& dab,
                                   const std::optional<OdVector>& residual) {
    StainMatrix m;
    m.rows_[0] = normalized(hematoxylin);
    m.rows_[1] = normalized(dab);
    m.rows_[2] = normalized(residual ? *residual : cross(m.rows_[0], m.rows_[1]));
    if (std::abs(det3(m.rows_)) <= kSingularTolerance)
        throw Error("SingularStainMatrix", "stain rows do not span OD space");
    return m;
}

const StainMatrix& StainMatrix::h_dab() {
    static const StainMatrix m =
        from_rows({0.650, 0.704, 0.286}, {0.268, 0.570, 0.776}, std::nullopt);
    return m;
}

double StainMatrix::det() const { return det3(rows_); }

OdVector rgb_to_od(const Rgb8& rgb) {
    auto channel = [](std::uint8_t i) {
        const double clamped = std::max(static_cast<double>(i), kIntensityClamp);
        return -std::log10(clamped / kBackgroundIntensity);
    };
    return {channel(rgb.r), channel(rgb.g), channel(rgb.b)};
}

OdVector deconvolve_od(const OdVector& od, const StainMatrix& m) {
    // c^T * M = od^T is M^T c = od; Cramer on A = M^T.
    const std::array<OdVector, 3> a = {
        OdVector{m.row(0)[0], m.row(1)[0], m.row(2)[0]},
        OdVector{m.row(0)[1], m.row(1)[1], m.row(2)[1]},
        OdVector{m.row(0)[2], m.row(1)[2], m.row(2)[2]},
    };
    const double d = det3(a);
    if (std::abs(d) <= kSingularTolerance)
        throw Error("SingularStainMatrix", "stain matrix is singular");
    OdVector c{};
    for (std::size_t j = 0; j < 3; ++j) {
        std::array<OdVector, 3> aj = a;
        for (std::size_t i = 0; i < 3; ++i) aj[i][j] = od[i];
        c[j] = det3(aj) / d;
    }
    return c;
}

LymphocyteMask dab_lymphocyte_mask(const RgbImage& image, const SlideMeta& meta,
                                   const StainMatrix& m, double threshold,
                                   std::int64_t min_area_px) {
    meta.validate();
    if (image.width() != meta.width_px || image.height() != meta.height_px)
        throw Error("ShapeMismatch", "IHC image does not match slide meta dimensions");
    if (min_area_px < 0) throw Error("InvalidValue", "min_area_px must be >= 0");

    // The DAB concentration is a fixed linear functional of the OD vector;
    // extract it once from the unit basis responses.
    OdVector dab_coeff{};
    for (std::size_t i = 0; i < 3; ++i) {
        OdVector unit{};
        unit[i] = 1.0;
        dab_coeff[i] = deconvolve_od(unit, m)[1];
    }

    // Per-channel OD lookup; intensities are 8-bit.
    std::array<double, 256> od_lut;
    for (int i = 0; i < 256; ++i)
        od_lut[static_cast<std::size_t>(i)] =
            rgb_to_od({static_cast<std::uint8_t>(i), 0, 0})[0];

    MaskGrid positive(image.width(), image.height(), 0);
    parallel_for(0, image.height(), [&](std::size_t y) {
        const Rgb8* src = image.row(y);
        std::uint8_t* dst = positive.row(y);
        for (std::size_t x = 0; x < image.width(); ++x) {
            const double dab = dab_coeff[0] * od_lut[src[x].r] + dab_coeff[1] * od_lut[src[x].g] +
                               dab_coeff[2] * od_lut[src[x].b];
            dst[x] = dab > threshold ? 1 : 0;
        }
    });

    // Area opening runs on the stitched mask so tiling cannot change results.
    return LymphocyteMask{meta, area_opening(positive, min_area_px)};
}

}  // namespace infiltra
