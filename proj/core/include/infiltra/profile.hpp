#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "infiltra/distance.hpp"
#include "infiltra/stain.hpp"

namespace infiltra {

// Lymphocyte pixel density per distance bin. Bins are half-open
// [edge(i), edge(i+1)) with edges at integer multiples of bin_width_um;
// density is lymph_px / tissue_px, or 0 for bins without tissue.
struct InfiltrationCurve {
    double bin_width_um = 10.0;
    double first_edge_um = 0.0;
    std::vector<double> density;
    std::vector<std::int64_t> tissue_px;
    std::vector<std::int64_t> lymph_px;

    std::size_t bins() const { return density.size(); }
    double edge(std::size_t i) const {
        return first_edge_um + static_cast<double>(i) * bin_width_um;
    }
    std::vector<double> bin_edges_um() const {
        std::vector<double> edges(bins() + 1);
        for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = edge(i);
        return edges;
    }
};

// The canonical comparison window: 400 bins of 10 um covering -2.0 mm
// (neoplastic side, index 0) to +2.0 mm (normal side, index 399).
inline constexpr double kWindowMinUm = -2000.0;
inline constexpr double kWindowMaxUm = 2000.0;
inline constexpr std::size_t kWindowBins = 400;
inline constexpr double kWindowBinUm = 10.0;

struct FixedWindowSeries {
    std::array<double, kWindowBins> values{};
};

// Bins every defined-distance pixel of `dist` into its 10 um (or custom) bin
// and counts lymphocyte-positive pixels per bin. Lymphocyte pixels without a
// defined distance are ignored.
InfiltrationCurve infiltration_curve(const SignedDistanceMap& dist, const LymphocyteMask& lymph,
                                     double bin_width_um = 10.0);

// Places a 10 um curve into the fixed +-2.0 mm window. Bins outside the
// window are truncated; missing bins at either end are filled by reflection
// without edge repetition ([a,b,c] padded left by 2 gives [c,b,a,b,c]).
// Throws InsufficientSupport when the needed padding reaches the series
// length.
FixedWindowSeries to_fixed_window(const InfiltrationCurve& curve);

}  // namespace infiltra
