#include "infiltra/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infiltra/error.hpp"
#include "infiltra/parallel.hpp"

namespace infiltra {

NormalizedSeries znorm(std::span<const double> series) {
    if (series.empty()) throw Error("EmptySeries", "cannot normalize an empty series");
    for (double v : series) {
        if (!std::isfinite(v)) throw Error("InvalidValue", "series contains non-finite values");
    }
    const double n = static_cast<double>(series.size());
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);

    NormalizedSeries out;
    out.values.resize(series.size());
    if (sigma == 0.0) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    for (std::size_t i = 0; i < series.size(); ++i) out.values[i] = (series[i] - mean) / sigma;
    return out;
}

double cdtw_distance(std::span<const double> a, std::span<const double> b,
                     int band_radius_bins) {
    if (band_radius_bins < 0) throw Error("InvalidValue", "band radius must be >= 0");
    const auto n = static_cast<std::int64_t>(a.size());
    const auto m = static_cast<std::int64_t>(b.size());
    if (n == 0 || m == 0) throw Error("EmptySeries", "cDTW needs non-empty series");
    const auto radius = static_cast<std::int64_t>(band_radius_bins);
    if (std::llabs(n - m) > radius)
        throw Error("BandInfeasible", "length difference exceeds the band radius");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(static_cast<std::size_t>(m) + 1, kInf);
    std::vector<double> cur(static_cast<std::size_t>(m) + 1, kInf);
    prev[0] = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), kInf);
        const std::int64_t jlo = std::max<std::int64_t>(1, i - radius);
        const std::int64_t jhi = std::min<std::int64_t>(m, i + radius);
        for (std::int64_t j = jlo; j <= jhi; ++j) {
            const double cost = std::abs(a[static_cast<std::size_t>(i - 1)] -
                                         b[static_cast<std::size_t>(j - 1)]);
            const double best = std::min({prev[static_cast<std::size_t>(j)],
                                          cur[static_cast<std::size_t>(j - 1)],
                                          prev[static_cast<std::size_t>(j - 1)]});
            cur[static_cast<std::size_t>(j)] = cost + best;
        }
        std::swap(prev, cur);
    }
    return prev[static_cast<std::size_t>(m)];
}

MatchReport rank_matches(const std::vector<SeriesEntry>& queries,
                         const std::vector<SeriesEntry>& targets,
                         const std::map<std::string, std::string>& pair_map,
                         int band_radius_bins) {
    if (band_radius_bins < 0) throw Error("InvalidValue", "band radius must be >= 0");
    if (queries.empty() || targets.empty())
        throw Error("EmptySeries", "matching needs at least one query and one target");
    for (const auto& q : queries) {
        const auto it = pair_map.find(q.id);
        if (it == pair_map.end())
            throw Error("InvalidPairing", "query '" + q.id + "' has no pair mapping");
        const bool known = std::any_of(targets.begin(), targets.end(),
                                       [&](const SeriesEntry& t) { return t.id == it->second; });
        if (!known)
            throw Error("InvalidPairing", "pair target '" + it->second + "' is not in the "
                                          "target set");
    }

    // Normalization happens here, not at the call sites, so raw curves of
    // different scales are always compared on equal footing.
    std::vector<NormalizedSeries> qn(queries.size());
    std::vector<NormalizedSeries> tn(targets.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        qn[i] = znorm(std::span(queries[i].series.values));
    for (std::size_t i = 0; i < targets.size(); ++i)
        tn[i] = znorm(std::span(targets[i].series.values));

    Grid<double> dist(targets.size(), queries.size());
    parallel_for(0, queries.size() * targets.size(), [&](std::size_t k) {
        const std::size_t qi = k / targets.size();
        const std::size_t ti = k % targets.size();
        dist[k] = cdtw_distance(std::span(qn[qi].values), std::span(tn[ti].values),
                                band_radius_bins);
    }, 4);

    MatchReport report;
    report.pair_map = pair_map;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const std::string& qid = queries[qi].id;
        report.query_ids.push_back(qid);
        std::vector<RankedTarget> ranked(targets.size());
        for (std::size_t ti = 0; ti < targets.size(); ++ti)
            ranked[ti] = RankedTarget{targets[ti].id, dist.at(ti, qi)};
        std::sort(ranked.begin(), ranked.end(), [](const RankedTarget& a, const RankedTarget& b) {
            if (a.distance != b.distance) return a.distance < b.distance;
            return a.id < b.id;
        });
        const std::string& truth = pair_map.at(qid);
        for (std::size_t k = 0; k < 3; ++k) {
            if (k < ranked.size() && ranked[k].id == truth) {
                for (std::size_t kk = k; kk < 3; ++kk) ++report.topk_hits[kk];
                break;
            }
        }
        report.ranking.emplace(qid, std::move(ranked));
    }
    return report;
}

}  // namespace infiltra
