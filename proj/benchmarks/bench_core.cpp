// Microbenchmarks for the hot paths: GLCM accumulation, Haralick features,
// the radix-2 FFT, vein morphology and a conv2d forward pass.

#include <benchmark/benchmark.h>

#include <random>

#include "leafrec/neural.hpp"
#include "leafrec/signature.hpp"
#include "leafrec/texture.hpp"
#include "leafrec/vein.hpp"

using namespace leafrec;

namespace {

GrayImage random_gray(int side, std::uint32_t seed) {
    std::mt19937 rng(seed);
    GrayImage g(side, side);
    for (auto& v : g.v) v = static_cast<std::uint8_t>(rng() % 256);
    return g;
}

void BM_Glcm(benchmark::State& state) {
    int side = static_cast<int>(state.range(0));
    GrayImage g = random_gray(side, 1);
    BinaryMask m(side, side, 1);
    for (auto _ : state) benchmark::DoNotOptimize(compute_glcm(g, m));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Glcm)->Arg(64)->Arg(128)->Arg(256);

void BM_Haralick(benchmark::State& state) {
    GrayImage g = random_gray(128, 2);
    BinaryMask m(128, 128, 1);
    Glcm glcm = compute_glcm(g, m);
    for (auto _ : state) benchmark::DoNotOptimize(haralick_features(glcm));
}
BENCHMARK(BM_Haralick);

void BM_Fft(benchmark::State& state) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uni(-1, 1);
    std::vector<double> x(static_cast<std::size_t>(state.range(0)));
    for (auto& v : x) v = uni(rng);
    for (auto _ : state) benchmark::DoNotOptimize(fft(x));
    state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(1024)->Arg(16384);

void BM_VeinStack(benchmark::State& state) {
    int side = static_cast<int>(state.range(0));
    GrayImage g = random_gray(side, 4);
    BinaryMask m(side, side, 1);
    for (auto _ : state) benchmark::DoNotOptimize(extract_vein(g, m));
}
BENCHMARK(BM_VeinStack)->Arg(64)->Arg(128);

void BM_Conv2dForward(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    Conv2d conv(3, 16, 3);
    for (auto p : conv.params())
        for (auto& v : *p.value) v = uni(rng);
    Tensor x({8, 3, 64, 64});
    for (auto& v : x.data) v = uni(rng);
    for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, false));
}
BENCHMARK(BM_Conv2dForward);

}  // namespace

BENCHMARK_MAIN();
