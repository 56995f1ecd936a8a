#pragma once

#include <cstdint>
#include <vector>

#include "infiltra/grid.hpp"

namespace infiltra {

// 8-connected components of the nonzero pixels. Labels run 1..count in raster
// order of each component's first pixel; zero marks background.
struct ComponentMap {
    Grid<std::int32_t> labels;
    std::int32_t count = 0;
    std::vector<std::int64_t> area;  // area[k] = pixels of component k+1

    std::int64_t total_area() const {
        std::int64_t sum = 0;
        for (std::int64_t a : area) sum += a;
        return sum;
    }
};

ComponentMap connected_components(const MaskGrid& mask);

// Removes every 8-connected component smaller than min_area_px. min_area 0
// keeps everything.
MaskGrid area_opening(const MaskGrid& mask, std::int64_t min_area_px);

}  // namespace infiltra
