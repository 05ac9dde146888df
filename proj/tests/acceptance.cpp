// Acceptance suite: one criterion per run (or all), one PASS/FAIL line each.
// Usage: acceptance [1..8|all]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pcu/autodiff.hpp"
#include "pcu/bvh.hpp"
#include "pcu/errors.hpp"
#include "pcu/geometry.hpp"
#include "pcu/io.hpp"
#include "pcu/loss.hpp"
#include "pcu/metrics.hpp"
#include "pcu/network.hpp"
#include "pcu/rng.hpp"
#include "pcu/training.hpp"
#include "support.hpp"

using namespace pcu;
using ad::Tensor;
using namespace testsupport;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("C%d %-28s %s (%s)\n", criterion, name, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::vector<double> random_values(int n, std::uint64_t seed, double lo, double hi) {
    rng::Stream s(rng::key(seed, 0xACCull));
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * s.next_uniform();
    return v;
}

// ---- C1: gradient integrity -------------------------------------------------

double primitive_gradcheck_worst() {
    double worst = 0.0;
    auto run = [&](const char* name, ad::Shape shape, auto make, double lo = -1.0,
                   double hi = 1.0) {
        ad::ParamStore store(31);
        auto& p = store.create_from(name, shape,
                                    random_values(static_cast<int>(ad::shape_numel(shape)),
                                                  std::strlen(name), lo, hi));
        auto f = [&]() { return make(p.value); };
        worst = std::max(worst, ad::grad_check(f, store, 1e-5).max_rel_error);
    };

    run("matmul", {4, 4}, [](Tensor x) { return ad::sum_all(ad::matmul(x, x)); });
    run("add", {2, 3, 4}, [](Tensor x) {
        Tensor c = Tensor::from_data({4}, {0.3, -0.4, 1.2, 0.9});
        return ad::sum_all(ad::square(ad::add(x, c)));
    });
    run("sub", {6}, [](Tensor x) {
        Tensor c = Tensor::from_data({2, 6}, random_values(12, 99, -1, 1));
        return ad::sum_all(ad::square(ad::sub(c, x)));
    });
    run("mul", {5, 2}, [](Tensor x) {
        Tensor c = Tensor::from_data({2}, {1.7, -0.6});
        return ad::sum_all(ad::mul(x, c));
    });
    run("concat", {3, 2}, [](Tensor x) {
        return ad::sum_all(ad::square(ad::concat(std::vector<Tensor>{x, x}, 0)));
    });
    run("gather", {6, 2},
        [](Tensor x) { return ad::sum_all(ad::square(ad::gather_rows(x, {5, 0, 0, 2}))); });
    run("reduce_max", {4, 5}, [](Tensor x) { return ad::sum_all(ad::reduce_max(x, 1)); });
    run("reduce_mean", {5, 3}, [](Tensor x) { return ad::sum_all(ad::reduce_mean(x, 0)); });
    run("reduce_sum", {2, 7}, [](Tensor x) { return ad::sum_all(ad::reduce_sum(x, 1)); });
    run("relu", {8}, [](Tensor x) { return ad::sum_all(ad::relu(x)); });
    run("softmax", {3, 4},
        [](Tensor x) { return ad::sum_all(ad::square(ad::softmax(x, 1))); });
    run("square", {7}, [](Tensor x) { return ad::sum_all(ad::square(x)); });
    run("sqrt", {6}, [](Tensor x) { return ad::sum_all(ad::sqrt(x)); }, 0.3, 2.0);
    run("reciprocal", {6}, [](Tensor x) { return ad::sum_all(ad::reciprocal(x)); }, 0.4, 2.0);
    run("abs", {8}, [](Tensor x) { return ad::sum_all(ad::abs(x)); });
    run("transpose", {4, 3},
        [](Tensor x) { return ad::sum_all(ad::square(ad::transpose(x))); });
    run("reshape", {4, 4},
        [](Tensor x) { return ad::sum_all(ad::square(ad::reshape(x, {2, 8}))); });
    run("tile", {2, 4}, [](Tensor x) { return ad::sum_all(ad::square(ad::tile(x, 1, 3))); });
    return worst;
}

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    double prim_worst = primitive_gradcheck_worst();
    bool prim_ok = prim_worst < 1e-6;

    // Full network + joint loss on a 16-point patch, desk-scale widths.
    // Neighbor counts clamp to the 4-point coarse patches.
    train::TrainConfig cfg;  // desk defaults
    cfg.net.gcn_k = std::min(cfg.net.gcn_k, 16 / cfg.net.rate - 1);
    cfg.sp.k = std::min(cfg.sp.k, 15);

    // Patch seed picked clear of ReLU/argmax boundaries so central differences
    // probe the smooth branch (finite differences cannot cross a kink).
    const std::uint64_t patch_seed = 5;
    Patch patch;
    patch.points = random_sphere_points(16, patch_seed);
    patch = geom::normalize(std::move(patch));
    net::Network network(cfg.net, cfg.seed);
    auto f = [&]() {
        auto coarse = geom::downsample_coarse(patch, cfg.net.rate, rng::key(patch_seed, 1));
        std::vector<Tensor> fine;
        for (const Patch& c : coarse)
            fine.push_back(network.coarse_to_fine(net::points_to_tensor(c.points)));
        Tensor t = ad::concat(fine, 0);
        return loss::joint_loss(net::points_to_tensor(patch.points), fine, t, cfg.weights,
                                cfg.uniform, cfg.sp, rng::key(patch_seed, 2))
            .total;
    };
    auto full = ad::grad_check(f, network.params(), 1e-5);
    bool full_ok = full.max_rel_error < 1e-4;

    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "primitives %.2e < 1e-6, network %.2e < 1e-4 (worst %s), %.0fs", prim_worst,
                  full.max_rel_error, full.worst_param.c_str(), secs);
    report(1, "gradient-integrity", prim_ok && full_ok && secs < 120.0, detail);
}

// ---- C2: oracle equivalence --------------------------------------------------

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    bool knn_ok = true, cd_ok = true, hd_ok = true, p2f_ok = true;

    for (int trial = 0; trial < 100; ++trial) {
        rng::Stream s(rng::key(400, trial));
        int n = 50 + s.next_index(451);
        int k = 1 + s.next_index(std::min(20, n - 1));
        auto pts = random_cube_points(n, 500 + trial);
        NeighborGraph fast = geom::knn(pts, k);
        NeighborGraph brute = brute_knn(pts, k);
        if (fast.indices != brute.indices || fast.distances != brute.distances) knn_ok = false;
    }
    for (int trial = 0; trial < 100; ++trial) {
        rng::Stream s(rng::key(600, trial));
        auto a = random_cube_points(20 + s.next_index(481), 700 + trial);
        auto b = random_cube_points(20 + s.next_index(481), 800 + trial);
        if (metrics::cd_metric(a, b) != brute_chamfer(a, b)) cd_ok = false;
        if (metrics::hd_metric(a, b) != brute_hausdorff(a, b)) hd_ok = false;
    }
    auto sphere = make_sphere_mesh(9, 12);   // 192 faces
    auto torus = make_torus_mesh(12, 10);    // 240 faces
    for (int trial = 0; trial < 100; ++trial) {
        const TriangleMesh& mesh = trial % 2 ? sphere : torus;
        auto pts = random_cube_points(50, 900 + trial, 1.6);
        TriangleBvh bvh(mesh);
        for (const Vec3& p : pts) {
            double fast = bvh.closest_dist2(p);
            double brute = std::numeric_limits<double>::infinity();
            for (const auto& f : mesh.faces)
                brute = std::min(brute,
                                 point_triangle_dist2(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                      mesh.vertices[f[2]]));
            if (fast != brute) p2f_ok = false;
        }
    }

    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char detail[160];
    std::snprintf(detail, sizeof detail, "knn %s, cd %s, hd %s, p2f %s, %.0fs",
                  knn_ok ? "ok" : "BAD", cd_ok ? "ok" : "BAD", hd_ok ? "ok" : "BAD",
                  p2f_ok ? "ok" : "BAD", secs);
    report(2, "oracle-equivalence", knn_ok && cd_ok && hd_ok && p2f_ok && secs < 60.0, detail);
}

// ---- C3: analytic zeros -------------------------------------------------------

void criterion_3() {
    auto pts = random_sphere_points(32, 5);
    double cd_self = std::abs(loss::chamfer(net::points_to_tensor(pts),
                                            net::points_to_tensor(pts))
                                  .item());

    const double r_d = 0.1;
    const double d_hat = loss::expected_spacing(10, r_d);
    std::vector<double> at_expectation(10, d_hat);
    double uni_zero = std::abs(loss::uniform_region_contribution(10, at_expectation, 10.0, d_hat));

    // Every point equal to its neighborhood centroid: coincident triples.
    std::vector<Vec3> q;
    for (const Vec3& site : random_sphere_points(6, 7))
        for (int c = 0; c < 3; ++c) q.push_back(site);
    loss::SelfProjectionConfig sp_cfg;
    sp_cfg.k = 2;
    double sp_zero = std::abs(loss::self_projection_term(net::points_to_tensor(q), sp_cfg).item());

    bool ok = cd_self < 1e-9 && uni_zero < 1e-9 && sp_zero < 1e-9;
    char detail[160];
    std::snprintf(detail, sizeof detail, "chamfer(A,A)=%.1e, uniform@(n,d)=%.1e, sp@centroid=%.1e",
                  cd_self, uni_zero, sp_zero);
    report(3, "loss-analytic-zeros", ok, detail);
}

// ---- C4: overfit convergence --------------------------------------------------

void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    train::TrainConfig cfg;  // desk config
    cfg.epochs = 2000;       // one patch, batch of one -> one step per epoch

    // A realistic training unit: one geodesic patch of a sphere sample.
    PointCloud cloud;
    cloud.points = random_sphere_points(512, 11);
    auto patches = geom::geodesic_patches(cloud, 8, cfg.patch_size, cfg.graph_k);
    std::vector<train::TrainItem> dataset(1);
    dataset[0].patch = patches[2];
    dataset[0].key = rng::key(cfg.seed, 0, 0);

    train::Trainer trainer(cfg);
    double rec0 = -1.0, rec_last = -1.0;
    trainer.fit(dataset, [&](const train::StepStats& s) {
        if (s.step == 0) rec0 = s.rec;
        rec_last = s.rec;
    });

    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = rec0 > 0.0 && rec_last < 0.1 * rec0 && secs < 600.0;
    char detail[160];
    std::snprintf(detail, sizeof detail, "rec step0 %.4f -> step2000 %.4f (ratio %.3f), %.0fs",
                  rec0, rec_last, rec_last / rec0, secs);
    report(4, "overfit-convergence", ok, detail);
}

// ---- C5: self-projection denoising --------------------------------------------

void criterion_5() {
    auto noisy = random_sphere_points(512, 13, 1.0, 0.05);
    auto mean_surface_dist = [](const std::vector<Vec3>& pts) {
        double sum = 0.0;
        for (const Vec3& p : pts) sum += std::abs(norm(p) - 1.0);
        return sum / static_cast<double>(pts.size());
    };
    double before = mean_surface_dist(noisy);

    ad::ParamStore store(17);
    std::vector<double> flat;
    for (const Vec3& p : noisy) {
        flat.push_back(p.x);
        flat.push_back(p.y);
        flat.push_back(p.z);
    }
    auto& q = store.create_from("points", {512, 3}, std::move(flat));
    loss::SelfProjectionConfig sp_cfg = train::TrainConfig{}.sp;  // desk-scale k
    for (int t = 1; t <= 50; ++t) {
        store.zero_grad();
        ad::backward(loss::self_projection_term(q.value, sp_cfg));
        train::adam_step(store, 3e-3, t);
    }
    std::vector<Vec3> denoised = net::tensor_to_points(q.value.detach());
    double after = mean_surface_dist(denoised);

    bool ok = after <= 0.7 * before;
    char detail[160];
    std::snprintf(detail, sizeof detail, "mean |dist-1|: %.5f -> %.5f (reduction %.1f%%)", before,
                  after, 100.0 * (1.0 - after / before));
    report(5, "self-projection-denoising", ok, detail);
}

// ---- C6: end-to-end toy pipeline ----------------------------------------------

void criterion_6() {
    auto t0 = std::chrono::steady_clock::now();
    train::TrainConfig cfg;  // desk config
    cfg.epochs = 200;        // converged well inside the time budget

    auto sphere_mesh = make_sphere_mesh(16, 24);
    auto torus_mesh = make_torus_mesh(16, 12);
    auto cube_mesh = make_cube_mesh();
    std::vector<PointCloud> models{
        io::sample_mesh(sphere_mesh, 512, io::SampleMode::kPoissonDisk, 21),
        io::sample_mesh(torus_mesh, 512, io::SampleMode::kPoissonDisk, 22),
        io::sample_mesh(cube_mesh, 512, io::SampleMode::kPoissonDisk, 23)};

    auto dataset = train::build_dataset(models, cfg);
    train::Trainer trainer(cfg);
    trainer.fit(dataset);

    // Held-out sphere sample, upsampled 4x.
    PointCloud held_out = io::sample_mesh(sphere_mesh, 512, io::SampleMode::kPoissonDisk, 99);
    PointCloud up = train::upsample_cloud(held_out, trainer.network(), cfg);

    // Baseline: each input point duplicated r times with radius-0.02 jitter.
    rng::Stream jitter(rng::key(77, 3));
    std::vector<Vec3> baseline;
    baseline.reserve(held_out.points.size() * 4);
    for (const Vec3& p : held_out.points)
        for (int c = 0; c < 4; ++c) {
            Vec3 dir{jitter.next_normal(), jitter.next_normal(), jitter.next_normal()};
            double len = norm(dir);
            double radius = 0.02 * std::cbrt(jitter.next_uniform());
            baseline.push_back(len > 0 ? p + dir * (radius / len) : p);
        }

    std::vector<double> ps{0.012};
    Patch up_norm, base_norm;
    up_norm.points = up.points;
    base_norm.points = baseline;
    double uni_up = metrics::uniformity_metric(geom::normalize(std::move(up_norm)).points, ps,
                                               50)[0.012];
    double uni_base = metrics::uniformity_metric(geom::normalize(std::move(base_norm)).points, ps,
                                                 50)[0.012];
    double p2f_up = metrics::p2f(up.points, sphere_mesh).mean;
    double p2f_base = metrics::p2f(baseline, sphere_mesh).mean;

    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = up.size() == 2048 && uni_up < uni_base && p2f_up < p2f_base && secs < 1800.0;
    char detail[220];
    std::snprintf(detail, sizeof detail,
                  "uni@1.2%%: ours %.4f vs baseline %.4f; p2f: ours %.5f vs baseline %.5f; %.0fs",
                  uni_up, uni_base, p2f_up, p2f_base, secs);
    report(6, "end-to-end-toy-pipeline", ok, detail);
}

// ---- C7: ablation non-degeneracy ----------------------------------------------

void criterion_7() {
    train::TrainConfig base;  // desk config
    base.epochs = 200;        // one patch -> 200 steps

    Patch patch;
    patch.points = random_sphere_points(base.patch_size, 31);
    patch = geom::normalize(std::move(patch));

    auto run_trace = [&](train::TrainConfig cfg) {
        std::vector<train::TrainItem> dataset(1);
        dataset[0].patch = patch;
        dataset[0].key = rng::key(cfg.seed, 0, 0);
        train::Trainer trainer(cfg);
        std::vector<double> trace;
        trainer.fit(dataset, [&](const train::StepStats& s) { trace.push_back(s.loss); });
        return trace;
    };

    auto full = run_trace(base);
    struct Variant {
        const char* name;
        train::TrainConfig cfg;
    };
    std::vector<Variant> variants;
    {
        auto v = base;
        v.net.use_self_attention = false;
        variants.push_back({"NSA", v});
    }
    {
        auto v = base;
        v.net.use_learnable_grid = false;
        variants.push_back({"NLG", v});
    }
    {
        auto v = base;
        v.net.use_hierarchical_folding = false;
        variants.push_back({"NHG", v});
    }
    {
        auto v = base;
        v.weights.alpha = 0.0;
        variants.push_back({"NRT", v});
    }
    {
        auto v = base;
        v.weights.beta = 0.0;
        variants.push_back({"NUT", v});
    }
    {
        auto v = base;
        v.weights.gamma = 0.0;
        variants.push_back({"NST", v});
    }

    std::string detail;
    bool all_ok = true;
    for (const auto& variant : variants) {
        auto trace = run_trace(variant.cfg);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < trace.size(); ++i)
            max_diff = std::max(max_diff, std::abs(trace[i] - full[i]));
        bool ok = max_diff > 1e-9;
        all_ok = all_ok && ok;
        detail += std::string(variant.name) + (ok ? " ok " : " DEGENERATE ");
    }
    report(7, "ablation-non-degeneracy", all_ok, detail);
}

// ---- C8: determinism and resume -------------------------------------------------

void criterion_8() {
    train::TrainConfig cfg;  // desk config
    cfg.epochs = 100;        // 4 patches, batch 4 -> 1 step per epoch

    PointCloud cloud;
    cloud.points = random_sphere_points(192, 41);
    std::vector<PointCloud> models{cloud};
    cfg.patches_per_model = 4;
    auto dataset = train::build_dataset(models, cfg);

    std::vector<double> run_a, run_b, tail;
    {
        train::Trainer t(cfg);
        t.fit(dataset, [&](const train::StepStats& s) { run_a.push_back(s.loss); });
    }
    {
        train::Trainer t(cfg);
        t.fit(dataset, [&](const train::StepStats& s) { run_b.push_back(s.loss); });
    }
    bool identical = run_a == run_b && run_a.size() == 100;

    auto ckpt = std::filesystem::temp_directory_path() / "pcu_acceptance_resume.bin";
    {
        auto half = cfg;
        half.epochs = 50;
        train::Trainer t(half);
        t.fit(dataset);
        t.save_checkpoint(ckpt, "");
    }
    bool resume_ok = false;
    {
        train::Trainer t(cfg);
        t.load_checkpoint(ckpt);
        t.fit(dataset, [&](const train::StepStats& s) { tail.push_back(s.loss); });
        resume_ok = tail.size() == 50;
        for (int i = 0; i < 50 && resume_ok; ++i)
            if (tail[i] != run_a[50 + i]) resume_ok = false;
    }
    std::filesystem::remove(ckpt);

    char detail[160];
    std::snprintf(detail, sizeof detail, "identical seeds %s, resume bit-exact %s",
                  identical ? "ok" : "BAD", resume_ok ? "ok" : "BAD");
    report(8, "determinism-and-resume", identical && resume_ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::string which = argc > 1 ? argv[1] : "all";
    auto want = [&](int c) { return which == "all" || which == std::to_string(c); };

    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    return g_failures;
}
