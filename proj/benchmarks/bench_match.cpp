#include <benchmark/benchmark.h>

#include <vector>

#include "infiltra/match.hpp"
#include "infiltra/rng.hpp"

using namespace infiltra;

static void BM_CdtwDistance(benchmark::State& state) {
    const auto radius = static_cast<int>(state.range(0));
    std::vector<double> a(kWindowBins), b(kWindowBins);
    for (std::size_t i = 0; i < kWindowBins; ++i) {
        a[i] = counter_uniform01(1, 0, i);
        b[i] = counter_uniform01(2, 0, i);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cdtw_distance(a, b, radius));
    }
}
BENCHMARK(BM_CdtwDistance)->Arg(0)->Arg(1)->Arg(4)->Arg(16);

static void BM_RankMatches(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<SeriesEntry> queries, targets;
    std::map<std::string, std::string> pairs;
    for (std::size_t k = 0; k < n; ++k) {
        FixedWindowSeries qa, tb;
        for (std::size_t i = 0; i < kWindowBins; ++i) {
            qa.values[i] = counter_uniform01(k, 0, i);
            tb.values[i] = qa.values[i] + 0.01 * counter_uniform01(k, 1, i);
        }
        const std::string id = "c" + std::to_string(k);
        queries.push_back(SeriesEntry{id, qa});
        targets.push_back(SeriesEntry{id, tb});
        pairs[id] = id;
    }
    for (auto _ : state) {
        MatchReport report = rank_matches(queries, targets, pairs, 1);
        benchmark::DoNotOptimize(report.topk_hits.data());
    }
}
BENCHMARK(BM_RankMatches)->Arg(12)->Arg(48)->Unit(benchmark::kMillisecond);
