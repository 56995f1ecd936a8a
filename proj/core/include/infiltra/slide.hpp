#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "infiltra/error.hpp"
#include "infiltra/grid.hpp"

namespace infiltra {

enum class Stain : std::uint8_t { HE, IhcCd3 };

// Physical geometry of an exported slide region. All distance computations
// convert pixel offsets to microns through microns_per_pixel.
struct SlideMeta {
    double microns_per_pixel = 1.0;
    std::size_t width_px = 0;
    std::size_t height_px = 0;
    Stain stain = Stain::HE;

    void validate() const {
        if (!(microns_per_pixel > 0.0) || !std::isfinite(microns_per_pixel))
            throw Error("InvalidMeta", "microns_per_pixel must be positive and finite");
        if (width_px < 1 || height_px < 1)
            throw Error("InvalidMeta", "slide dimensions must be at least 1x1");
    }
};

// Region classes of the annotated ROI. The numeric order doubles as the
// rasterization precedence: Irrelevant > Neoplastic > Normal > Background.
enum class RegionLabel : std::uint8_t {
    Background = 0,  // outside the annotated ROI
    Normal = 1,
    Neoplastic = 2,
    Irrelevant = 3,
};

struct TissueLabelMask {
    SlideMeta meta;
    Grid<RegionLabel> labels;

    void validate() const {
        meta.validate();
        if (labels.width() != meta.width_px || labels.height() != meta.height_px)
            throw Error("ShapeMismatch", "label grid does not match slide meta dimensions");
    }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct AnnotationPolygon {
    RegionLabel label = RegionLabel::Normal;  // never Background
    std::vector<Point> vertices;              // >= 3, pixel coordinates
};

struct AnnotationSet {
    std::vector<AnnotationPolygon> polygons;
};

// Rasterizes polygon annotations onto the pixel grid. A pixel belongs to a
// polygon when its center (x+0.5, y+0.5) lies inside by the even-odd rule;
// overlaps resolve to the highest-precedence label. Polygon order never
// affects the result.
TissueLabelMask rasterize_annotations(const AnnotationSet& annotations, const SlideMeta& meta);

enum class ScaleMode { NearestNeighbor, Bilinear };

// round(dim * factor), half away from zero, floored at 1.
std::size_t scaled_dim(std::size_t dim, double factor);

namespace detail {
inline void check_scale(double factor) {
    if (!std::isfinite(factor) || factor <= 0.0)
        throw Error("InvalidScale", "scale factor must be positive and finite");
}
}  // namespace detail

// Nearest-neighbor rescale; the only mode valid for label and binary grids.
// Output pixels sample the input at their mapped centers, so the output
// contains only values present in the input and factor 1.0 is the identity.
template <typename T>
Grid<T> rescale_nearest(const Grid<T>& in, double factor) {
    detail::check_scale(factor);
    const std::size_t ow = scaled_dim(in.width(), factor);
    const std::size_t oh = scaled_dim(in.height(), factor);
    Grid<T> out(ow, oh);
    const double rx = static_cast<double>(in.width()) / static_cast<double>(ow);
    const double ry = static_cast<double>(in.height()) / static_cast<double>(oh);
    for (std::size_t y = 0; y < oh; ++y) {
        std::size_t sy = static_cast<std::size_t>((static_cast<double>(y) + 0.5) * ry);
        if (sy >= in.height()) sy = in.height() - 1;
        const T* src = in.row(sy);
        T* dst = out.row(y);
        for (std::size_t x = 0; x < ow; ++x) {
            std::size_t sx = static_cast<std::size_t>((static_cast<double>(x) + 0.5) * rx);
            if (sx >= in.width()) sx = in.width() - 1;
            dst[x] = src[sx];
        }
    }
    return out;
}

// Bilinear rescale for intensity grids.
Grid<double> rescale_bilinear(const Grid<double>& in, double factor);
Grid<std::uint8_t> rescale_bilinear(const Grid<std::uint8_t>& in, double factor);

template <typename T>
Grid<T> rescale_grid(const Grid<T>& in, double factor, ScaleMode mode) {
    if (mode == ScaleMode::NearestNeighbor) return rescale_nearest(in, factor);
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::uint8_t>) {
        return rescale_bilinear(in, factor);
    } else {
        throw Error("InvalidScale", "bilinear rescale requires an intensity grid");
    }
}

}  // namespace infiltra
