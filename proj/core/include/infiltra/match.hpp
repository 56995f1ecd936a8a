#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "infiltra/profile.hpp"

namespace infiltra {

// Z-scored series: mean 0, population standard deviation 1; a constant
// input maps to all zeros.
struct NormalizedSeries {
    std::vector<double> values;
};

NormalizedSeries znorm(std::span<const double> series);

// Band-constrained DTW distance with local cost |a_i - b_j|, accumulated sum,
// Sakoe-Chiba band |i - j| <= band_radius_bins, no path-length normalization.
// The default radius of 1 bin encodes a 10 um shift tolerance on 10 um bins.
double cdtw_distance(std::span<const double> a, std::span<const double> b,
                     int band_radius_bins = 1);

struct SeriesEntry {
    std::string id;
    FixedWindowSeries series;
};

struct RankedTarget {
    std::string id;
    double distance = 0.0;
};

struct MatchReport {
    std::vector<std::string> query_ids;
    std::map<std::string, std::vector<RankedTarget>> ranking;  // ascending distance
    std::map<std::string, std::string> pair_map;               // query -> true target
    std::array<std::int64_t, 3> topk_hits{};                   // k = 1, 2, 3
};

// Z-normalizes every query and target, computes all pairwise cDTW distances,
// ranks targets per query (ties broken by target id), and tallies how many
// queries place their true target within the top-k ranks.
MatchReport rank_matches(const std::vector<SeriesEntry>& queries,
                         const std::vector<SeriesEntry>& targets,
                         const std::map<std::string, std::string>& pair_map,
                         int band_radius_bins = 1);

}  // namespace infiltra
