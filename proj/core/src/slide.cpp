#include "infiltra/slide.hpp"

#include <algorithm>
#include <cmath>

#include "infiltra/parallel.hpp"

namespace infiltra {

std::size_t scaled_dim(std::size_t dim, double factor) {
    detail::check_scale(factor);
    const double scaled = std::floor(static_cast<double>(dim) * factor + 0.5);
    if (scaled < 1.0) return 1;
    return static_cast<std::size_t>(scaled);
}

namespace {

// Even-odd crossings of the horizontal line y = yc with the polygon boundary,
// returned as the x coordinates of the intersections. Vertices exactly on the
// scanline are counted by the half-open rule [min(y), max(y)).
void scanline_crossings(const AnnotationPolygon& poly, double yc, std::vector<double>& xs) {
    xs.clear();
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % n];
        if ((p.y <= yc) == (q.y <= yc)) continue;  // horizontal edges never cross
        const double t = (yc - p.y) / (q.y - p.y);
        xs.push_back(p.x + t * (q.x - p.x));
    }
    std::sort(xs.begin(), xs.end());
}

}  // namespace

TissueLabelMask rasterize_annotations(const AnnotationSet& annotations, const SlideMeta& meta) {
    meta.validate();
    const double w = static_cast<double>(meta.width_px);
    const double h = static_cast<double>(meta.height_px);
    for (const auto& poly : annotations.polygons) {
        if (poly.label == RegionLabel::Background)
            throw Error("InvalidAnnotation", "polygons may not carry the Background label");
        if (poly.vertices.size() < 3)
            throw Error("InvalidAnnotation", "polygon needs at least 3 vertices");
        for (const Point& p : poly.vertices) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.x > w || p.y < 0.0 ||
                p.y > h)
                throw Error("OutOfBounds", "polygon vertex outside the slide bounds");
        }
    }

    TissueLabelMask out{meta, Grid<RegionLabel>(meta.width_px, meta.height_px,
                                                RegionLabel::Background)};
    Grid<RegionLabel>& labels = out.labels;
    const std::size_t width = meta.width_px;

    parallel_for(0, meta.height_px, [&](std::size_t y) {
        const double yc = static_cast<double>(y) + 0.5;
        RegionLabel* dst = labels.row(y);
        std::vector<double> xs;
        for (const auto& poly : annotations.polygons) {
            scanline_crossings(poly, yc, xs);
            for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
                // centers x+0.5 in [xl, xr)
                const double xl = xs[k];
                const double xr = xs[k + 1];
                std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(std::ceil(xl - 0.5));
                std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(std::ceil(xr - 0.5)) - 1;
                lo = std::max<std::ptrdiff_t>(lo, 0);
                hi = std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(width) - 1);
                for (std::ptrdiff_t x = lo; x <= hi; ++x) {
                    if (static_cast<std::uint8_t>(poly.label) >
                        static_cast<std::uint8_t>(dst[x]))
                        dst[x] = poly.label;
                }
            }
        }
    });
    return out;
}

namespace {

template <typename T, typename Round>
Grid<T> bilinear_impl(const Grid<T>& in, double factor, Round round) {
    detail::check_scale(factor);
    const std::size_t ow = scaled_dim(in.width(), factor);
    const std::size_t oh = scaled_dim(in.height(), factor);
    Grid<T> out(ow, oh);
    const double rx = static_cast<double>(in.width()) / static_cast<double>(ow);
    const double ry = static_cast<double>(in.height()) / static_cast<double>(oh);
    const std::size_t wmax = in.width() - 1;
    const std::size_t hmax = in.height() - 1;
    for (std::size_t y = 0; y < oh; ++y) {
        const double sy = (static_cast<double>(y) + 0.5) * ry - 0.5;
        const double syc = std::clamp(sy, 0.0, static_cast<double>(hmax));
        const std::size_t y0 = static_cast<std::size_t>(syc);
        const std::size_t y1 = std::min(y0 + 1, hmax);
        const double fy = syc - static_cast<double>(y0);
        T* dst = out.row(y);
        for (std::size_t x = 0; x < ow; ++x) {
            const double sx = (static_cast<double>(x) + 0.5) * rx - 0.5;
            const double sxc = std::clamp(sx, 0.0, static_cast<double>(wmax));
            const std::size_t x0 = static_cast<std::size_t>(sxc);
            const std::size_t x1 = std::min(x0 + 1, wmax);
            const double fx = sxc - static_cast<double>(x0);
            const double top = static_cast<double>(in.at(x0, y0)) * (1.0 - fx) +
                               static_cast<double>(in.at(x1, y0)) * fx;
            const double bot = static_cast<double>(in.at(x0, y1)) * (1.0 - fx) +
                               static_cast<double>(in.at(x1, y1)) * fx;
            dst[x] = round(top * (1.0 - fy) + bot * fy);
        }
    }
    return out;
}

}  // namespace

Grid<double> rescale_bilinear(const Grid<double>& in, double factor) {
    return bilinear_impl(in, factor, [](double v) { return v; });
}

Grid<std::uint8_t> rescale_bilinear(const Grid<std::uint8_t>& in, double factor) {
    return bilinear_impl(in, factor, [](double v) {
        return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    });
}

}  // namespace infiltra
