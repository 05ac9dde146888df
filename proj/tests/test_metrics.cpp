#include <doctest.h>

#include <cmath>

#include "pcu/bvh.hpp"
#include "pcu/metrics.hpp"
#include "pcu/rng.hpp"
#include "support.hpp"

using namespace pcu;
using namespace testsupport;

TEST_CASE("cd and hd are zero for identical sets") {
    auto pts = random_cube_points(40, 1);
    CHECK(metrics::cd_metric(pts, pts) == 0.0);
    CHECK(metrics::hd_metric(pts, pts) == 0.0);
}

TEST_CASE("hd hand example on a line") {
    std::vector<Vec3> a{{0, 0, 0}};
    std::vector<Vec3> b{{0, 0, 0}, {3, 0, 0}};
    CHECK(metrics::hd_metric(a, b) == doctest::Approx(3.0));
}

TEST_CASE("accelerated cd/hd equal the brute-force oracle bit-for-bit") {
    for (int trial = 0; trial < 100; ++trial) {
        int na = 20 + (trial * 7) % 480;
        int nb = 20 + (trial * 13) % 480;
        auto a = random_cube_points(na, 1000 + trial);
        auto b = random_cube_points(nb, 2000 + trial);
        CHECK(metrics::cd_metric(a, b) == brute_chamfer(a, b));
        CHECK(metrics::hd_metric(a, b) == brute_hausdorff(a, b));
    }
}

TEST_CASE("hd dominates each one-sided mean") {
    auto a = random_cube_points(50, 3);
    auto b = random_cube_points(60, 4);
    // max >= mean on both sides, so hd >= cd/2 for these sets by construction
    // of the one-sided statistics.
    CHECK(metrics::hd_metric(a, b) >= metrics::cd_metric(a, b) / 2.0);
}

TEST_CASE("point-triangle distance basics") {
    Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
    CHECK(point_triangle_dist2({0.2, 0.2, 0}, a, b, c) <= 1e-30);
    CHECK(point_triangle_dist2({0.2, 0.2, 0.5}, a, b, c) == doctest::Approx(0.25));
    // Beyond the ab edge: distance to the segment.
    CHECK(point_triangle_dist2({0.5, -2, 0}, a, b, c) == doctest::Approx(4.0));
    // Beyond a vertex.
    CHECK(point_triangle_dist2({-3, -4, 0}, a, b, c) == doctest::Approx(25.0));
}

TEST_CASE("p2f of mesh vertices is zero") {
    auto mesh = make_sphere_mesh(8, 12);
    auto result = metrics::p2f(mesh.vertices, mesh);
    for (double d : result.per_point) CHECK(d == 0.0);
}

TEST_CASE("p2f equals the per-face brute-force oracle") {
    auto sphere = make_sphere_mesh(10, 14);
    auto torus = make_torus_mesh(10, 8);
    for (const auto& mesh : {sphere, torus}) {
        auto pts = random_cube_points(200, 7, 1.5);
        TriangleBvh bvh(mesh);
        for (const Vec3& p : pts) {
            double fast = bvh.closest_dist(p);
            double brute = brute_p2f(p, mesh);
            CHECK(fast == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("p2f height above a triangle interior") {
    TriangleMesh m;
    m.vertices = {{0, 0, 0}, {4, 0, 0}, {0, 4, 0}};
    m.faces = {{0, 1, 2}};
    auto result = metrics::p2f(std::vector<Vec3>{{1, 1, 0.75}}, m);
    CHECK(result.mean == doctest::Approx(0.75));
}

TEST_CASE("uniformity is permutation- and rotation-invariant") {
    auto pts = random_sphere_points(256, 9);
    std::vector<double> ps{0.012};
    auto base = metrics::uniformity_metric(pts, ps, 16);

    std::vector<Vec3> reversed(pts.rbegin(), pts.rend());
    auto rev = metrics::uniformity_metric(reversed, ps, 16);

    double angle = 0.7;
    std::vector<Vec3> rotated(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        rotated[i] = {pts[i].x * std::cos(angle) - pts[i].y * std::sin(angle),
                      pts[i].x * std::sin(angle) + pts[i].y * std::cos(angle), pts[i].z};
    auto rot = metrics::uniformity_metric(rotated, ps, 16);

    CHECK(rot[0.012] == doctest::Approx(base[0.012]).epsilon(1e-9));
    CHECK(rev[0.012] == doctest::Approx(base[0.012]).epsilon(1e-9));
}

TEST_CASE("metric report serialization carries every field") {
    metrics::MetricReport r;
    r.cd = 0.001;
    r.hd = 0.01;
    r.p2f_mean = 0.002;
    r.uniformity[0.004] = 1.5;
    r.uniformity[0.012] = 2.5;
    r.pred_points = 2048;
    r.gt_points = 8192;

    std::string text = r.to_text();
    CHECK(text.find("cd 0.001") != std::string::npos);
    CHECK(text.find("uniformity_p0.004 1.5") != std::string::npos);

    std::string json = r.to_json();
    CHECK(json.find("\"cd\"") != std::string::npos);
    CHECK(json.find("\"0.012\"") != std::string::npos);
    CHECK(json.find("\"pred_points\": 2048") != std::string::npos);
}

TEST_CASE("evaluate bundles cd/hd/p2f/uniformity") {
    auto mesh = make_sphere_mesh(12, 16);
    auto pts = random_sphere_points(300, 11);
    std::vector<double> ps{0.004, 0.012};
    auto report = metrics::evaluate(pts, pts, &mesh, ps, 16);
    CHECK(report.cd == 0.0);
    CHECK(report.hd == 0.0);
    CHECK(report.has_p2f());
    CHECK(report.p2f_mean < 0.05);  // random sphere points sit near the faceted surface
    CHECK(report.uniformity.size() == 2);
}
