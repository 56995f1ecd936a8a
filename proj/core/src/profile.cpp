#include "infiltra/profile.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "infiltra/error.hpp"

namespace infiltra {

namespace {

struct BinCounts {
    std::vector<std::int64_t> tissue;
    std::vector<std::int64_t> lymph;
};

// Histogram over a row range; merged by integer addition, so any row split
// reproduces the sequential result exactly.
void bin_rows(const SignedDistanceMap& dist, const LymphocyteMask& lymph, double width,
              std::int64_t first_bin, std::size_t y0, std::size_t y1, BinCounts& counts) {
    const std::size_t w = dist.dist_um.width();
    for (std::size_t y = y0; y < y1; ++y) {
        const double* d = dist.dist_um.row(y);
        const std::uint8_t* m = lymph.mask.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            if (!SignedDistanceMap::defined(d[x])) continue;
            const auto bin = static_cast<std::size_t>(
                static_cast<std::int64_t>(std::floor(d[x] / width)) - first_bin);
            ++counts.tissue[bin];
            counts.lymph[bin] += m[x] != 0;
        }
    }
}

}  // namespace

InfiltrationCurve infiltration_curve(const SignedDistanceMap& dist, const LymphocyteMask& lymph,
                                     double bin_width_um) {
    if (!(bin_width_um > 0.0) || !std::isfinite(bin_width_um))
        throw Error("InvalidValue", "bin width must be positive and finite");
    if (!dist.dist_um.same_shape(lymph.mask))
        throw Error("ShapeMismatch", "distance map and lymphocyte mask differ in shape");
    if (dist.meta.microns_per_pixel != lymph.meta.microns_per_pixel)
        throw Error("ShapeMismatch", "distance map and lymphocyte mask differ in resolution");

    double min_d = std::numeric_limits<double>::infinity();
    double max_d = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dist.dist_um.size(); ++i) {
        const double v = dist.dist_um[i];
        if (!SignedDistanceMap::defined(v)) continue;
        min_d = std::min(min_d, v);
        max_d = std::max(max_d, v);
    }
    if (!std::isfinite(min_d))
        throw Error("DegenerateLabels", "distance map has no defined pixels");

    const auto first_bin = static_cast<std::int64_t>(std::floor(min_d / bin_width_um));
    const auto last_bin = static_cast<std::int64_t>(std::floor(max_d / bin_width_um));
    const auto nbins = static_cast<std::size_t>(last_bin - first_bin + 1);

    const std::size_t h = dist.dist_um.height();
    std::size_t workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min<std::size_t>(workers, std::max<std::size_t>(h / 64, 1));

    std::vector<BinCounts> partial(workers);
    for (auto& p : partial) {
        p.tissue.assign(nbins, 0);
        p.lymph.assign(nbins, 0);
    }
    if (workers == 1) {
        bin_rows(dist, lymph, bin_width_um, first_bin, 0, h, partial[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t rows_per = (h + workers - 1) / workers;
        for (std::size_t t = 0; t < workers; ++t) {
            const std::size_t y0 = t * rows_per;
            const std::size_t y1 = std::min(h, y0 + rows_per);
            pool.emplace_back([&, t, y0, y1] {
                if (y0 < y1) bin_rows(dist, lymph, bin_width_um, first_bin, y0, y1, partial[t]);
            });
        }
        for (auto& th : pool) th.join();
    }

    InfiltrationCurve curve;
    curve.bin_width_um = bin_width_um;
    curve.first_edge_um = static_cast<double>(first_bin) * bin_width_um;
    curve.tissue_px.assign(nbins, 0);
    curve.lymph_px.assign(nbins, 0);
    for (const auto& p : partial) {
        for (std::size_t i = 0; i < nbins; ++i) {
            curve.tissue_px[i] += p.tissue[i];
            curve.lymph_px[i] += p.lymph[i];
        }
    }
    curve.density.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        curve.density[i] = curve.tissue_px[i] > 0
                               ? static_cast<double>(curve.lymph_px[i]) /
                                     static_cast<double>(curve.tissue_px[i])
                               : 0.0;
    }
    return curve;
}

FixedWindowSeries to_fixed_window(const InfiltrationCurve& curve) {
    if (std::abs(curve.bin_width_um - kWindowBinUm) > 1e-12)
        throw Error("InvalidBinWidth", "fixed window requires 10 um bins");
    const double offset = (curve.first_edge_um - kWindowMinUm) / kWindowBinUm;
    const auto shift = static_cast<std::int64_t>(std::llround(offset));
    if (std::abs(offset - static_cast<double>(shift)) > 1e-9)
        throw Error("MisalignedBins", "curve bin edges are not multiples of 10 um");

    const auto n = static_cast<std::int64_t>(curve.bins());
    std::int64_t non_empty = 0;
    for (std::int64_t t : curve.tissue_px) non_empty += t > 0;
    if (non_empty < 2)
        throw Error("InsufficientSupport", "fixed window needs at least 2 non-empty bins");

    // Window index i maps to curve index i - shift.
    const std::int64_t j_first = -shift;
    const std::int64_t j_last = static_cast<std::int64_t>(kWindowBins) - 1 - shift;
    const std::int64_t left_pad = std::max<std::int64_t>(0, -j_first);
    const std::int64_t right_pad = std::max<std::int64_t>(0, j_last - (n - 1));
    if (left_pad >= n || right_pad >= n)
        throw Error("InsufficientSupport", "curve too short to reflect into the fixed window");

    FixedWindowSeries out;
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        std::int64_t j = static_cast<std::int64_t>(i) - shift;
        if (j < 0) j = -j;                            // mirror about index 0
        else if (j >= n) j = 2 * (n - 1) - j;         // mirror about index n-1
        out.values[i] = curve.density[static_cast<std::size_t>(j)];
    }
    return out;
}

}  // namespace infiltra
