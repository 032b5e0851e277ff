#include <benchmark/benchmark.h>

#include <random>

#include "sgv/bilateral.hpp"
#include "sgv/classifier.hpp"
#include "sgv/filter.hpp"
#include "sgv/geometry.hpp"
#include "sgv/metrics.hpp"

namespace {

sgv::binary_mask random_mask(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    sgv::binary_mask m(size, size);
    for (auto& b : m.bits) b = rng() % 3 == 0 ? 1 : 0;
    return m;
}

sgv::prob_map random_map(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    sgv::prob_map p(size, size);
    for (auto& v : p.values) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return p;
}

void bm_iou(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto a = random_mask(size, 1), b = random_mask(size, 2);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::iou(a, b));
}
BENCHMARK(bm_iou)->Arg(64)->Arg(256);

void bm_distance_transform(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto m = random_mask(size, 3);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::distance_transform(m));
}
BENCHMARK(bm_distance_transform)->Arg(64)->Arg(256);

void bm_gaussian_blur(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto p = random_map(size, 4);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::gaussian_blur(p, 5.0));
}
BENCHMARK(bm_gaussian_blur)->Arg(64)->Arg(256);

void bm_bilateral(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto p = random_map(size, 5);
    const auto guide = random_map(size, 6);
    const sgv::bilateral_config cfg{4.0, 0.1, 8};
    for (auto _ : state) benchmark::DoNotOptimize(sgv::bilateral_filter(p, guide, cfg));
}
BENCHMARK(bm_bilateral)->Arg(64)->Arg(128);

void bm_fuse_forward(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto f1 = random_map(size, 7), f2 = random_map(size, 8), w = random_map(size, 9);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::fuse_forward(f1, f2, w));
}
BENCHMARK(bm_fuse_forward)->Arg(64)->Arg(512);

void bm_classifier_forward(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    std::mt19937_64 rng(10);
    sgv::pixel_features features(size, size, 6);
    for (auto& v : features.values) v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    sgv::train_config tc;
    tc.seed = 11;
    const auto params = sgv::random_init(6, tc);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::classifier_forward(features, params));
}
BENCHMARK(bm_classifier_forward)->Arg(64)->Arg(128);

void bm_f_measure(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    const auto pred = random_mask(size, 12), gt = random_mask(size, 13);
    for (auto _ : state) benchmark::DoNotOptimize(sgv::f_measure(pred, gt, 2.0));
}
BENCHMARK(bm_f_measure)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
