#pragma once

#include <filesystem>

#include "infiltra/grid.hpp"
#include "infiltra/stain.hpp"

namespace infiltra {

// Single-channel 8-bit image, PNG or PGM selected by content. Throws
// FileNotFound when the path cannot be opened and InvalidImage on malformed
// or non-grayscale data.
MaskGrid read_gray_image(const std::filesystem::path& path);

// 8-bit RGB PNG; palette images are expanded, alpha is stripped.
RgbImage read_rgb_image(const std::filesystem::path& path);

void write_gray_png(const std::filesystem::path& path, const MaskGrid& image);
void write_gray_pgm(const std::filesystem::path& path, const MaskGrid& image);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace infiltra
