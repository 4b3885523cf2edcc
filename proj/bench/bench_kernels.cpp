// Serial vs parallel timings for the sample-parallel kernels.
#include <benchmark/benchmark.h>

#include <random>

#include "dropdecomp/decomp_two.hpp"
#include "dropdecomp/fixtures.hpp"

using namespace dd;

namespace {

std::vector<SpectralMultiset> random_spectra(int count) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> t(0.01, 0.99);
    std::vector<SpectralMultiset> v;
    for (int i = 0; i < count; ++i) {
        std::vector<std::pair<double, int>> in;
        for (int j = 0; j < 16; ++j) in.push_back({t(rng), 1});
        v.push_back(SpectralMultiset::make(2, 1, 1, in));
    }
    return v;
}

void BM_check_sdp(benchmark::State& st) {
    const auto specs = random_spectra(static_cast<int>(st.range(0)));
    const Exec ex = st.range(1) ? Exec::parallel : Exec::serial;
    for (auto _ : st) benchmark::DoNotOptimize(check_sdp(specs, 0.1, 0.01, ex));
}
BENCHMARK(BM_check_sdp)->Args({4096, 0})->Args({4096, 1})->Unit(benchmark::kMillisecond);

void BM_hom_distance(benchmark::State& st) {
    auto fx = sdp_fixture(2, 2, 1, 10, 0.2, static_cast<int>(st.range(0)));
    const std::vector<Element> F{DimensionDropElement::identity_fn(2)};
    const Exec ex = st.range(1) ? Exec::parallel : Exec::serial;
    for (auto _ : st) benchmark::DoNotOptimize(hom_distance_on_F(fx.rep, fx.rep, F, ex));
}
BENCHMARK(BM_hom_distance)->Args({513, 0})->Args({513, 1})->Unit(benchmark::kMillisecond);

void BM_pairing_check(benchmark::State& st) {
    const auto tri = single_triangle();
    const std::vector<ScalarField> F{ScalarField::coordinate(3, 0), ScalarField::coordinate(3, 1)};
    PairingCheckOptions o;
    o.trials = 2000;
    o.exec = st.range(0) ? Exec::parallel : Exec::serial;
    for (auto _ : st) benchmark::DoNotOptimize(pairing_from_closeness_check(tri, F, 0.15, 4, o));
}
BENCHMARK(BM_pairing_check)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
