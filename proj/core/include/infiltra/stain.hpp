#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "infiltra/grid.hpp"
#include "infiltra/slide.hpp"

namespace infiltra {

struct Rgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

using RgbImage = Grid<Rgb8>;

// Optical density per RGB channel (dimensionless, >= 0).
using OdVector = std::array<double, 3>;

// Stain basis in optical-density space: one unit-norm row per stain.
// Concentrations c satisfy od = c_h * hematoxylin + c_d * dab + c_r * residual.
class StainMatrix {
  public:
    // Builds a basis from raw row vectors. Rows are normalized to unit length;
    // a missing residual is completed as the normalized cross product of the
    // first two rows. Throws SingularStainMatrix when the rows do not span.
    static StainMatrix from_rows(const OdVector& hematoxylin, const OdVector& dab,
                                 const std::optional<OdVector>& residual = std::nullopt);

    // Published H-DAB basis: hematoxylin (0.650, 0.704, 0.286),
    // DAB (0.268, 0.570, 0.776), residual completed by cross product.
    static const StainMatrix& h_dab();

    const OdVector& row(std::size_t i) const { return rows_[i]; }
    const OdVector& hematoxylin() const { return rows_[0]; }
    const OdVector& dab() const { return rows_[1]; }
    const OdVector& residual() const { return rows_[2]; }
    double det() const;

  private:
    StainMatrix() = default;
    std::array<OdVector, 3> rows_{};
};

// Beer-Lambert conversion with background intensity 255 and clamp 0.5:
// od_c = -log10(max(I_c, 0.5) / 255). White maps to zero density.
OdVector rgb_to_od(const Rgb8& rgb);

// Expresses od in the stain basis, i.e. solves c^T * M = od^T. Negative
// components are preserved so callers can threshold them.
OdVector deconvolve_od(const OdVector& od, const StainMatrix& m);

struct LymphocyteMask {
    SlideMeta meta;
    MaskGrid mask;  // nonzero = lymphocyte-positive

    void validate() const {
        meta.validate();
        if (mask.width() != meta.width_px || mask.height() != meta.height_px)
            throw Error("ShapeMismatch", "lymphocyte mask does not match slide meta dimensions");
    }
};

// The IHC reference pipeline: per-pixel optical density, deconvolution to the
// DAB channel, binary threshold, then removal of 8-connected positive
// components smaller than min_area_px.
LymphocyteMask dab_lymphocyte_mask(const RgbImage& image, const SlideMeta& meta,
                                   const StainMatrix& m, double threshold = 0.095,
                                   std::int64_t min_area_px = 12);

}  // namespace infiltra
