#include "infiltra/distance.hpp"

#include <cstdint>
#include <limits>
#include <vector>

#include "infiltra/error.hpp"
#include "infiltra/parallel.hpp"

namespace infiltra {

namespace {

constexpr std::int32_t kNoFeature = -1;

// Phase 1: per-column squared distance to the nearest feature row, computed
// as two row-major sweeps with per-column run lengths. kNoFeature marks
// columns without any feature pixel.
void column_pass(const Grid<RegionLabel>& labels, RegionLabel feature, Grid<std::int32_t>& sq) {
    const std::size_t w = labels.width();
    const std::size_t h = labels.height();
    const std::int32_t unreachable = std::numeric_limits<std::int32_t>::max();

    std::vector<std::int32_t> run(w, unreachable);
    for (std::size_t y = 0; y < h; ++y) {
        const RegionLabel* src = labels.row(y);
        std::int32_t* dst = sq.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            if (src[x] == feature)
                run[x] = 0;
            else if (run[x] != unreachable)
                ++run[x];
            dst[x] = run[x];
        }
    }
    std::fill(run.begin(), run.end(), unreachable);
    for (std::size_t y = h; y-- > 0;) {
        const RegionLabel* src = labels.row(y);
        std::int32_t* dst = sq.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            if (src[x] == feature)
                run[x] = 0;
            else if (run[x] != unreachable)
                ++run[x];
            const std::int32_t d = std::min(dst[x], run[x]);
            dst[x] = d == unreachable ? kNoFeature : d * d;
        }
    }
}

// Phase 2: lower envelope of the parabolas (x - site)^2 + f(site) over the
// columns that reached a feature, evaluated at every column of the row.
// Integer arithmetic at the query points keeps the result exact.
struct EnvelopeScratch {
    std::vector<std::int64_t> site;
    std::vector<std::int64_t> value;
    std::vector<double> boundary;
};

void row_envelope(const std::int32_t* f, std::size_t w, double* out_sq, EnvelopeScratch& s) {
    s.site.clear();
    s.value.clear();
    s.boundary.clear();
    s.boundary.push_back(-std::numeric_limits<double>::infinity());

    for (std::size_t x = 0; x < w; ++x) {
        if (f[x] == kNoFeature) continue;
        const std::int64_t q = static_cast<std::int64_t>(x);
        const std::int64_t fq = f[x];
        while (!s.site.empty()) {
            const std::int64_t p = s.site.back();
            const std::int64_t fp = s.value.back();
            const double cut = static_cast<double>(fq - fp + q * q - p * p) /
                               static_cast<double>(2 * (q - p));
            if (cut > s.boundary.back()) {
                s.boundary.push_back(cut);
                break;
            }
            s.site.pop_back();
            s.value.pop_back();
            s.boundary.pop_back();
        }
        if (s.site.empty()) {
            s.boundary.resize(1);
        }
        s.site.push_back(q);
        s.value.push_back(fq);
    }

    std::size_t k = 0;
    const std::size_t last = s.site.size() - 1;
    for (std::size_t x = 0; x < w; ++x) {
        const double xd = static_cast<double>(x);
        while (k < last && s.boundary[k + 1] < xd) ++k;
        const std::int64_t dx = static_cast<std::int64_t>(x) - s.site[k];
        out_sq[x] = static_cast<double>(dx * dx + s.value[k]);
    }
}

// One directed pass: write sqrt(squared distance to `target`) * mpp into the
// pixels labelled `source`, with the stated sign.
void directed_pass(const TissueLabelMask& mask, RegionLabel source, RegionLabel target,
                   double sign, Grid<std::int32_t>& scratch, Grid<double>& dist_um) {
    column_pass(mask.labels, target, scratch);
    const std::size_t w = mask.labels.width();
    const double mpp = mask.meta.microns_per_pixel;

    parallel_for(0, mask.labels.height(), [&](std::size_t y) {
        static thread_local EnvelopeScratch env;
        static thread_local std::vector<double> row_sq;
        row_sq.resize(w);
        row_envelope(scratch.row(y), w, row_sq.data(), env);
        const RegionLabel* src = mask.labels.row(y);
        double* dst = dist_um.row(y);
        for (std::size_t x = 0; x < w; ++x) {
            if (src[x] == source) dst[x] = sign * std::sqrt(row_sq[x]) * mpp;
        }
    });
}

}  // namespace

SignedDistanceMap signed_edt(const TissueLabelMask& mask) {
    mask.validate();
    const Grid<RegionLabel>& labels = mask.labels;
    if (labels.height() > 46340)
        throw Error("GridTooLarge", "signed EDT supports heights up to 46340 pixels");

    std::size_t normal = 0;
    std::size_t neoplastic = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        normal += labels[i] == RegionLabel::Normal;
        neoplastic += labels[i] == RegionLabel::Neoplastic;
    }
    if (normal == 0 || neoplastic == 0)
        throw Error("DegenerateLabels", "signed EDT needs at least one Normal and one "
                                        "Neoplastic pixel");

    SignedDistanceMap out{mask.meta, Grid<double>(labels.width(), labels.height(),
                                                  std::numeric_limits<double>::quiet_NaN())};
    Grid<std::int32_t> scratch(labels.width(), labels.height());
    directed_pass(mask, RegionLabel::Normal, RegionLabel::Neoplastic, +1.0, scratch, out.dist_um);
    directed_pass(mask, RegionLabel::Neoplastic, RegionLabel::Normal, -1.0, scratch, out.dist_um);
    return out;
}

}  // namespace infiltra
