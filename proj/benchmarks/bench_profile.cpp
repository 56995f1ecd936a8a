#include <benchmark/benchmark.h>

#include "infiltra/profile.hpp"
#include "infiltra/synth.hpp"

using namespace infiltra;

static void BM_InfiltrationCurve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const ProfileSpec spec{{{-2000.0, 0.0, 0.05}, {0.0, 2000.0, 0.4}}};
    const double mpp = 4200.0 / static_cast<double>(n);  // window plus slack
    const SyntheticCase synthetic = generate_case(spec, StraightMargin{}, n, n, mpp, 3);
    const SignedDistanceMap dist = signed_edt(synthetic.labels);
    for (auto _ : state) {
        InfiltrationCurve curve = infiltration_curve(dist, synthetic.lymph_a);
        benchmark::DoNotOptimize(curve.density.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_InfiltrationCurve)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
