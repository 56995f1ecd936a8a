#include "infiltra/eval.hpp"

#include <cmath>
#include <unordered_map>

#include "infiltra/error.hpp"
#include "infiltra/labeling.hpp"

namespace infiltra {

namespace {

// overlap[a][b] = shared pixels of component a of one mask and b of the other.
using OverlapTable = std::vector<std::unordered_map<std::int32_t, std::int64_t>>;

double one_direction(const ComponentMap& own, const ComponentMap& other,
                     const OverlapTable& overlap_own) {
    double weighted = 0.0;
    for (std::int32_t label = 1; label <= own.count; ++label) {
        const auto& row = overlap_own[static_cast<std::size_t>(label)];
        std::int32_t best = 0;
        std::int64_t best_overlap = 0;
        for (const auto& [cand, ov] : row) {
            if (ov > best_overlap || (ov == best_overlap && best != 0 && cand < best)) {
                best = cand;
                best_overlap = ov;
            }
        }
        if (best == 0) continue;  // unmatched component contributes dice 0
        const auto a = static_cast<double>(own.area[static_cast<std::size_t>(label) - 1]);
        const auto b = static_cast<double>(other.area[static_cast<std::size_t>(best) - 1]);
        const double dice = 2.0 * static_cast<double>(best_overlap) / (a + b);
        weighted += a * dice;
    }
    // single division keeps the perfect-agreement case at exactly 1
    return weighted / static_cast<double>(own.total_area());
}

}  // namespace

double object_level_dice(const MaskGrid& pred, const MaskGrid& gt) {
    if (!pred.same_shape(gt))
        throw Error("ShapeMismatch", "prediction and ground truth differ in shape");

    const ComponentMap cp = connected_components(pred);
    const ComponentMap cg = connected_components(gt);
    if (cp.count == 0 && cg.count == 0) return 1.0;
    if (cp.count == 0 || cg.count == 0) return 0.0;

    OverlapTable gt_overlap(static_cast<std::size_t>(cg.count) + 1);
    OverlapTable pred_overlap(static_cast<std::size_t>(cp.count) + 1);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const std::int32_t pl = cp.labels[i];
        const std::int32_t gl = cg.labels[i];
        if (pl != 0 && gl != 0) {
            ++gt_overlap[static_cast<std::size_t>(gl)][pl];
            ++pred_overlap[static_cast<std::size_t>(pl)][gl];
        }
    }

    const double gt_side = one_direction(cg, cp, gt_overlap);
    const double pred_side = one_direction(cp, cg, pred_overlap);
    return 0.5 * (gt_side + pred_side);
}

ObjectDiceReport make_dice_report(std::vector<PatchDice> per_patch) {
    ObjectDiceReport report;
    report.per_patch = std::move(per_patch);
    if (!report.per_patch.empty()) {
        double sum = 0.0;
        for (const auto& p : report.per_patch) sum += p.dice;
        report.mean_dice = sum / static_cast<double>(report.per_patch.size());
    }
    return report;
}

MaskGrid points_to_disks(const std::vector<Point>& centers, double radius_um,
                         const SlideMeta& meta) {
    meta.validate();
    if (!(radius_um > 0.0) || !std::isfinite(radius_um))
        throw Error("InvalidValue", "disk radius must be positive and finite");
    const double w = static_cast<double>(meta.width_px);
    const double h = static_cast<double>(meta.height_px);
    for (const Point& c : centers) {
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || c.x < 0.0 || c.x > w || c.y < 0.0 ||
            c.y > h)
            throw Error("OutOfBounds", "annotated center outside the slide bounds");
    }

    const double radius_px = radius_um / meta.microns_per_pixel;
    const double r2 = radius_px * radius_px;
    MaskGrid mask(meta.width_px, meta.height_px, 0);
    for (const Point& c : centers) {
        const auto x0 = static_cast<std::ptrdiff_t>(std::ceil(c.x - radius_px));
        const auto x1 = static_cast<std::ptrdiff_t>(std::floor(c.x + radius_px));
        const auto y0 = static_cast<std::ptrdiff_t>(std::ceil(c.y - radius_px));
        const auto y1 = static_cast<std::ptrdiff_t>(std::floor(c.y + radius_px));
        for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(y0, 0);
             y <= std::min<std::ptrdiff_t>(y1, static_cast<std::ptrdiff_t>(meta.height_px) - 1);
             ++y) {
            for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(x0, 0);
                 x <= std::min<std::ptrdiff_t>(x1, static_cast<std::ptrdiff_t>(meta.width_px) - 1);
                 ++x) {
                const double dx = static_cast<double>(x) - c.x;
                const double dy = static_cast<double>(y) - c.y;
                if (dx * dx + dy * dy <= r2) mask.at(static_cast<std::size_t>(x),
                                                     static_cast<std::size_t>(y)) = 1;
            }
        }
    }
    return mask;
}

}  // namespace infiltra
