// Measures the OpenMP kernels against their serial reference
// implementations: grayscale histogram, skeleton thinning, and weighted
// adapter merging. Run with --benchmark_filter=... to select a subset.

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "inkline/lora_math.hpp"
#include "inkline/raster.hpp"
#include "inkline/raster_trace.hpp"
#include "inkline/reference.hpp"
#include "inkline/rng.hpp"

namespace {

using namespace inkline;

GrayRaster random_gray(int side) {
    Rng rng(99);
    GrayRaster img;
    img.width = side;
    img.height = side;
    img.intensities.resize(static_cast<size_t>(side) * side);
    for (auto& v : img.intensities)
        v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

// Synthetic line art: a fan of 3-px-thick chords plus concentric rings,
// the kind of mask the thinning pass sees in practice.
BinaryRaster line_art_mask(int side) {
    BinaryRaster mask = make_binary(side, side);
    const double c = side / 2.0;
    const auto stamp = [&](double x, double y) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int px = static_cast<int>(x) + dx;
                const int py = static_cast<int>(y) + dy;
                if (px >= 0 && py >= 0 && px < side && py < side)
                    mask.set(px, py, true);
            }
        }
    };
    for (int k = 0; k < 12; ++k) {
        const double angle = k * 3.14159265358979 / 12.0;
        const double dx = std::cos(angle), dy = std::sin(angle);
        for (double t = -c + 2; t < c - 2; t += 0.5)
            stamp(c + t * dx, c + t * dy);
    }
    for (int r = side / 8; r < side / 2 - 2; r += side / 8) {
        for (double a = 0.0; a < 6.2832; a += 0.5 / r)
            stamp(c + r * std::cos(a), c + r * std::sin(a));
    }
    return mask;
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
    Matrix m = Matrix::zeros(rows, cols);
    for (double& v : m.entries) v = rng.normal();
    return m;
}

MergeSpec adapter_stack(Rng& rng, int rows, int cols, int n, int rank) {
    MergeSpec spec;
    for (int i = 0; i < n; ++i) {
        spec.items.push_back({LoraAdapter{random_matrix(rng, rows, rank),
                                          random_matrix(rng, rank, cols),
                                          rank},
                              0.25 + 0.5 * rng.uniform()});
    }
    return spec;
}

void BM_Histogram(benchmark::State& state) {
    const GrayRaster img = random_gray(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(histogram256(img));
    state.SetBytesProcessed(state.iterations() * img.intensities.size());
}

void BM_HistogramReference(benchmark::State& state) {
    const GrayRaster img = random_gray(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::histogram256(img));
    state.SetBytesProcessed(state.iterations() * img.intensities.size());
}

void BM_Thin(benchmark::State& state) {
    const BinaryRaster mask = line_art_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(thin(mask));
}

void BM_ThinReference(benchmark::State& state) {
    const BinaryRaster mask = line_art_mask(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::thin(mask));
}

void BM_MergeLora(benchmark::State& state) {
    Rng rng(7);
    const int side = static_cast<int>(state.range(0));
    const Matrix base = random_matrix(rng, side, side);
    const MergeSpec spec = adapter_stack(rng, side, side, 4, 16);
    for (auto _ : state) benchmark::DoNotOptimize(merge_lora(base, spec));
}

void BM_MergeLoraReference(benchmark::State& state) {
    Rng rng(7);
    const int side = static_cast<int>(state.range(0));
    const Matrix base = random_matrix(rng, side, side);
    const MergeSpec spec = adapter_stack(rng, side, side, 4, 16);
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::merge_lora(base, spec));
}

BENCHMARK(BM_Histogram)->Arg(512)->Arg(2048);
BENCHMARK(BM_HistogramReference)->Arg(512)->Arg(2048);
BENCHMARK(BM_Thin)->Arg(256)->Arg(512);
BENCHMARK(BM_ThinReference)->Arg(256)->Arg(512);
BENCHMARK(BM_MergeLora)->Arg(256)->Arg(1024);
BENCHMARK(BM_MergeLoraReference)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
