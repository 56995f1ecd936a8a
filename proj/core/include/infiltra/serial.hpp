#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "infiltra/distance.hpp"
#include "infiltra/eval.hpp"
#include "infiltra/match.hpp"
#include "infiltra/profile.hpp"
#include "infiltra/slide.hpp"
#include "infiltra/stain.hpp"
#include "infiltra/synth.hpp"

namespace infiltra {

// Shortest round-trip decimal representation; used by every text writer so
// outputs stay byte-identical across runs.
std::string format_double(double v);

// Writes through a temporary file in the target directory, then renames.
// Partial files are never observable at `path`.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);
void atomic_write_with(const std::filesystem::path& path,
                       const std::function<void(const std::filesystem::path&)>& writer);

// --- SlideMeta sidecar ---------------------------------------------------
SlideMeta read_slide_meta(const std::filesystem::path& path);
std::string slide_meta_json(const SlideMeta& meta);

// --- annotations -----------------------------------------------------------
// {"polygons":[{"label":"normal","vertices":[[x,y],...]},...]}
AnnotationSet read_annotation_set(const std::filesystem::path& path);

// --- stain matrix config ---------------------------------------------------
// {"hematoxylin":[r,g,b],"dab":[r,g,b],"residual":[r,g,b]|null}
StainMatrix read_stain_matrix(const std::filesystem::path& path);

// --- infiltration curves ---------------------------------------------------
// CSV header: bin_start_um,bin_end_um,density,tissue_px,lymph_px
std::string curve_csv(const InfiltrationCurve& curve);
std::string curve_json(const InfiltrationCurve& curve);
InfiltrationCurve read_curve_csv(const std::filesystem::path& path);
InfiltrationCurve read_curve_json(const std::filesystem::path& path);
InfiltrationCurve load_curve(const std::filesystem::path& path);  // by extension

// CSV header: bin_start_um,bin_end_um,density
std::string window_csv(const FixedWindowSeries& window);

// --- matching ----------------------------------------------------------------
std::map<std::string, std::string> read_pair_map(const std::filesystem::path& path);
std::string match_report_json(const MatchReport& report);
std::string match_report_table(const MatchReport& report);

// --- evaluation ----------------------------------------------------------------
std::string dice_report_json(const ObjectDiceReport& report);
std::vector<Point> read_centers(const std::filesystem::path& path);

// --- synthetic profiles ------------------------------------------------------
// {"pieces":[[d_start_um,d_end_um,density],...]}
ProfileSpec read_profile_spec(const std::filesystem::path& path);

// --- distance export ---------------------------------------------------------
// Flat little-endian doubles, row-major, NaN for undefined pixels, next to a
// JSON header {width, height, microns_per_pixel}.
void write_distance_raw(const std::filesystem::path& data_path,
                        const std::filesystem::path& header_path,
                        const SignedDistanceMap& dist);

// --- plotting ------------------------------------------------------------------
// Deterministic SVG line plot of density against signed margin distance with
// the margin marked at 0.
std::string curve_svg(const InfiltrationCurve& curve);

}  // namespace infiltra
