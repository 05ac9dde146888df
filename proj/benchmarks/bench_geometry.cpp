#include <benchmark/benchmark.h>

#include <vector>

#include "pcu/geometry.hpp"
#include "pcu/kdtree.hpp"
#include "pcu/metrics.hpp"
#include "pcu/rng.hpp"

namespace {

std::vector<pcu::Vec3> random_points(int n, std::uint64_t seed) {
    pcu::rng::Stream s(pcu::rng::key(seed));
    std::vector<pcu::Vec3> pts(n);
    for (auto& p : pts)
        p = {2.0 * s.next_uniform() - 1.0, 2.0 * s.next_uniform() - 1.0,
             2.0 * s.next_uniform() - 1.0};
    return pts;
}

void bm_knn(benchmark::State& state) {
    auto pts = random_points(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        auto g = pcu::geom::knn(pts, 10);
        benchmark::DoNotOptimize(g.indices.data());
    }
}
BENCHMARK(bm_knn)->Arg(512)->Arg(2048)->Arg(8192);

void bm_fps(benchmark::State& state) {
    auto pts = random_points(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        auto picks = pcu::geom::fps(pts, static_cast<int>(state.range(0)) / 4, 0);
        benchmark::DoNotOptimize(picks.data());
    }
}
BENCHMARK(bm_fps)->Arg(512)->Arg(2048)->Arg(8192);

void bm_cd_metric(benchmark::State& state) {
    auto a = random_points(static_cast<int>(state.range(0)), 3);
    auto b = random_points(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(pcu::metrics::cd_metric(a, b));
}
BENCHMARK(bm_cd_metric)->Arg(2048)->Arg(8192);

void bm_geodesic_patches(benchmark::State& state) {
    pcu::PointCloud cloud;
    cloud.points = random_points(2048, 5);
    for (auto _ : state) {
        auto patches = pcu::geom::geodesic_patches(cloud, 24, 256, 5);
        benchmark::DoNotOptimize(patches.data());
    }
}
BENCHMARK(bm_geodesic_patches);

}  // namespace
