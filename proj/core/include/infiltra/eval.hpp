#pragma once

#include <string>
#include <vector>

#include "infiltra/grid.hpp"
#include "infiltra/slide.hpp"

namespace infiltra {

// Size-weighted bidirectional Dice over max-overlap-paired 8-connected
// components. Both masks empty scores 1, exactly one empty scores 0.
double object_level_dice(const MaskGrid& pred, const MaskGrid& gt);

struct PatchDice {
    std::string id;
    double dice = 0.0;
};

struct ObjectDiceReport {
    std::vector<PatchDice> per_patch;
    double mean_dice = 0.0;  // arithmetic mean over patches
};

ObjectDiceReport make_dice_report(std::vector<PatchDice> per_patch);

// Converts center-point ground truth into a disk mask: pixel (x, y) is
// positive when it lies within radius_um (converted to pixels via meta) of
// any annotated center, distances measured in pixel coordinates.
MaskGrid points_to_disks(const std::vector<Point>& centers, double radius_um,
                         const SlideMeta& meta);

}  // namespace infiltra
