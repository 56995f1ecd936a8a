#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "infiltra/profile.hpp"
#include "infiltra/slide.hpp"
#include "infiltra/stain.hpp"

namespace infiltra {

struct ProfilePiece {
    double d_start_um = 0.0;
    double d_end_um = 0.0;
    double density = 0.0;  // lymphocyte pixel density in [0, 1]
};

// Piecewise-constant target density as a function of signed margin distance.
// Pieces are sorted, contiguous, and must cover the +-2.0 mm window.
struct ProfileSpec {
    std::vector<ProfilePiece> pieces;

    void validate() const;
    // Density at a signed distance; clamps to the outermost pieces beyond
    // the covered range.
    double density_at(double d_um) const;
};

struct StraightMargin {};
struct SineMargin {
    double amplitude_um = 0.0;
    double period_um = 1.0;
};
using MarginGeometry = std::variant<StraightMargin, SineMargin>;

// Paired synthetic slide: one label grid plus two independent lymphocyte
// realizations standing in for the H&E / IHC slides of adjacent sections.
struct SyntheticCase {
    TissueLabelMask labels;
    LymphocyteMask lymph_a;
    LymphocyteMask lymph_b;
    std::uint64_t seed = 0;
    ProfileSpec spec;
};

// Splits the grid into Neoplastic (left of the margin curve) and Normal
// (right), then draws each pixel lymphocyte-positive with probability
// spec(density at its signed margin distance) from disjoint counter-based
// streams for the two realizations. Bit-identical for identical inputs.
SyntheticCase generate_case(const ProfileSpec& spec, const MarginGeometry& geometry,
                            std::size_t width_px, std::size_t height_px,
                            double microns_per_pixel, std::uint64_t seed);

// Analytic expected density per fixed-window bin: the tissue-weighted average
// of the spec over each bin, exact for pieces aligned to bin edges and for
// straight-margin tissue (uniform in distance) otherwise.
FixedWindowSeries oracle_curve(const ProfileSpec& spec);

}  // namespace infiltra
