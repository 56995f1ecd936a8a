#include "infiltra/synth.hpp"

#include <algorithm>
#include <cmath>

#include "infiltra/distance.hpp"
#include "infiltra/error.hpp"
#include "infiltra/parallel.hpp"
#include "infiltra/rng.hpp"

namespace infiltra {

void ProfileSpec::validate() const {
    if (pieces.empty()) throw Error("InvalidProfile", "profile spec has no pieces");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const ProfilePiece& p = pieces[i];
        if (!(p.d_start_um < p.d_end_um))
            throw Error("InvalidProfile", "piece range must be non-empty and ordered");
        if (!(p.density >= 0.0 && p.density <= 1.0))
            throw Error("InvalidProfile", "piece density must lie in [0, 1]");
        if (i > 0 && pieces[i - 1].d_end_um != p.d_start_um)
            throw Error("InvalidProfile", "pieces must be contiguous without gaps or overlaps");
    }
    if (pieces.front().d_start_um > kWindowMinUm || pieces.back().d_end_um < kWindowMaxUm)
        throw Error("InvalidProfile", "pieces must cover the +-2.0 mm window");
}

double ProfileSpec::density_at(double d_um) const {
    if (d_um < pieces.front().d_start_um) return pieces.front().density;
    for (const ProfilePiece& p : pieces) {
        if (d_um < p.d_end_um) return p.density;
    }
    return pieces.back().density;
}

namespace {

constexpr std::uint64_t kStreamA = 0;
constexpr std::uint64_t kStreamB = 1;

double margin_x_px(const MarginGeometry& geometry, double y_px, double half_width_px,
                   double mpp) {
    if (std::holds_alternative<StraightMargin>(geometry)) return half_width_px;
    const SineMargin& s = std::get<SineMargin>(geometry);
    const double phase = 2.0 * 3.14159265358979323846 * ((y_px + 0.5) * mpp) / s.period_um;
    return half_width_px + (s.amplitude_um / mpp) * std::sin(phase);
}

MaskGrid draw_mask(const ProfileSpec& spec, const Grid<double>& dist_um, std::uint64_t seed,
                   std::uint64_t stream) {
    MaskGrid mask(dist_um.width(), dist_um.height(), 0);
    parallel_for(0, dist_um.height(), [&](std::size_t y) {
        const double* d = dist_um.row(y);
        std::uint8_t* dst = mask.row(y);
        const std::uint64_t base = static_cast<std::uint64_t>(y) * dist_um.width();
        for (std::size_t x = 0; x < dist_um.width(); ++x) {
            const double p = spec.density_at(d[x]);
            dst[x] = counter_uniform01(seed, stream, base + x) < p ? 1 : 0;
        }
    });
    return mask;
}

}  // namespace

SyntheticCase generate_case(const ProfileSpec& spec, const MarginGeometry& geometry,
                            std::size_t width_px, std::size_t height_px,
                            double microns_per_pixel, std::uint64_t seed) {
    spec.validate();
    SlideMeta meta{microns_per_pixel, width_px, height_px, Stain::HE};
    meta.validate();

    const double amplitude =
        std::holds_alternative<SineMargin>(geometry) ? std::get<SineMargin>(geometry).amplitude_um
                                                     : 0.0;
    const double half_width_um = static_cast<double>(width_px) * microns_per_pixel / 2.0;
    if (half_width_um < kWindowMaxUm + amplitude)
        throw Error("GeometryTooSmall", "grid too narrow for the +-2.0 mm window");

    const double half_width_px = static_cast<double>(width_px) / 2.0;
    TissueLabelMask labels{meta, Grid<RegionLabel>(width_px, height_px)};
    parallel_for(0, height_px, [&](std::size_t y) {
        const double mx = margin_x_px(geometry, static_cast<double>(y), half_width_px,
                                      microns_per_pixel);
        RegionLabel* dst = labels.labels.row(y);
        for (std::size_t x = 0; x < width_px; ++x)
            dst[x] = static_cast<double>(x) + 0.5 < mx ? RegionLabel::Neoplastic
                                                       : RegionLabel::Normal;
    });

    // Signed margin distance per pixel: analytic for the straight margin
    // (exactly the center-to-center EDT), transform-based for curved margins.
    Grid<double> dist_um(width_px, height_px);
    if (std::holds_alternative<StraightMargin>(geometry)) {
        const auto first_normal = static_cast<double>(width_px / 2);
        parallel_for(0, height_px, [&](std::size_t y) {
            double* dst = dist_um.row(y);
            for (std::size_t x = 0; x < width_px; ++x) {
                const double xd = static_cast<double>(x);
                dst[x] = xd >= first_normal ? (xd - first_normal + 1.0) * microns_per_pixel
                                            : (xd - first_normal) * microns_per_pixel;
            }
        });
    } else {
        dist_um = signed_edt(labels).dist_um;
    }

    SyntheticCase out;
    out.labels = std::move(labels);
    out.lymph_a = LymphocyteMask{meta, draw_mask(spec, dist_um, seed, kStreamA)};
    out.lymph_b = LymphocyteMask{meta, draw_mask(spec, dist_um, seed, kStreamB)};
    out.lymph_b.meta.stain = Stain::IhcCd3;
    out.seed = seed;
    out.spec = spec;
    return out;
}

FixedWindowSeries oracle_curve(const ProfileSpec& spec) {
    spec.validate();
    FixedWindowSeries out;
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        const double lo = kWindowMinUm + static_cast<double>(i) * kWindowBinUm;
        const double hi = lo + kWindowBinUm;
        double weighted = 0.0;
        for (const ProfilePiece& p : spec.pieces) {
            const double overlap = std::min(hi, p.d_end_um) - std::max(lo, p.d_start_um);
            if (overlap > 0.0) weighted += overlap * p.density;
        }
        out.values[i] = weighted / kWindowBinUm;
    }
    return out;
}

}  // namespace infiltra
