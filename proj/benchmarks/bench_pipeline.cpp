#include <benchmark/benchmark.h>

#include "pcu/geometry.hpp"
#include "pcu/network.hpp"
#include "pcu/rng.hpp"
#include "pcu/training.hpp"

namespace {

pcu::Patch sphere_patch(int n, std::uint64_t seed) {
    pcu::rng::Stream s(pcu::rng::key(seed));
    pcu::Patch patch;
    patch.points.resize(n);
    for (auto& p : patch.points) {
        pcu::Vec3 g{s.next_normal(), s.next_normal(), s.next_normal()};
        double len = pcu::norm(g);
        p = len > 0 ? g / len : pcu::Vec3{1, 0, 0};
    }
    return pcu::geom::normalize(std::move(patch));
}

void bm_coarse_to_fine_forward(benchmark::State& state) {
    pcu::train::TrainConfig cfg;
    pcu::net::Network network(cfg.net, 1);
    auto patch = sphere_patch(cfg.patch_size / cfg.rate(), 7);
    auto coarse = pcu::net::points_to_tensor(patch.points);
    pcu::ad::NoGradGuard guard;
    for (auto _ : state) {
        auto fine = network.coarse_to_fine(coarse);
        benchmark::DoNotOptimize(fine.data().data());
    }
}
BENCHMARK(bm_coarse_to_fine_forward);

void bm_train_step(benchmark::State& state) {
    pcu::train::TrainConfig cfg;
    pcu::train::Trainer trainer(cfg);
    std::vector<pcu::train::TrainItem> batch(1);
    batch[0].patch = sphere_patch(cfg.patch_size, 9);
    batch[0].key = pcu::rng::key(1, 0, 0);
    for (auto _ : state) {
        auto stats = trainer.train_step(batch);
        benchmark::DoNotOptimize(stats.loss);
    }
}
BENCHMARK(bm_train_step)->Unit(benchmark::kMillisecond);

}  // namespace
