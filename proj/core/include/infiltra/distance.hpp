#pragma once

#include <cmath>

#include "infiltra/grid.hpp"
#include "infiltra/slide.hpp"

namespace infiltra {

// Signed distance to the tumor margin in microns. Positive on Normal tissue,
// negative on Neoplastic tissue, NaN (undefined) on Background and Irrelevant
// pixels. Magnitudes are exact center-to-center Euclidean distances.
struct SignedDistanceMap {
    SlideMeta meta;
    Grid<double> dist_um;

    static bool defined(double v) noexcept { return !std::isnan(v); }
};

// Exact Euclidean distance transform of the label partition: each Normal
// pixel carries +distance to the nearest Neoplastic pixel center, each
// Neoplastic pixel -distance to the nearest Normal pixel center. Background
// and Irrelevant pixels are undefined and excluded as targets of both passes.
// Throws DegenerateLabels unless both tissue classes are present.
SignedDistanceMap signed_edt(const TissueLabelMask& labels);

}  // namespace infiltra
