#include <benchmark/benchmark.h>

#include "infiltra/distance.hpp"
#include "infiltra/rng.hpp"

using namespace infiltra;

namespace {

TissueLabelMask random_labels(std::size_t n) {
    TissueLabelMask mask{SlideMeta{0.454, n, n, Stain::HE}, Grid<RegionLabel>(n, n)};
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        const std::uint64_t r = counter_hash(7, 0, i) % 100;
        mask.labels[i] = r < 45   ? RegionLabel::Normal
                         : r < 90 ? RegionLabel::Neoplastic
                         : r < 95 ? RegionLabel::Irrelevant
                                  : RegionLabel::Background;
    }
    return mask;
}

}  // namespace

static void BM_SignedEdt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const TissueLabelMask labels = random_labels(n);
    for (auto _ : state) {
        SignedDistanceMap dist = signed_edt(labels);
        benchmark::DoNotOptimize(dist.dist_um.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_SignedEdt)->Arg(512)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
