#include <benchmark/benchmark.h>

#include "infiltra/rng.hpp"
#include "infiltra/stain.hpp"

using namespace infiltra;

static void BM_DabMask(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    RgbImage image(n, n);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const std::uint64_t h = counter_hash(11, 0, i);
        image[i] = Rgb8{static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8),
                        static_cast<std::uint8_t>(h >> 16)};
    }
    const SlideMeta meta{0.454, n, n, Stain::IhcCd3};
    for (auto _ : state) {
        LymphocyteMask mask = dab_lymphocyte_mask(image, meta, StainMatrix::h_dab());
        benchmark::DoNotOptimize(mask.mask.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DabMask)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
