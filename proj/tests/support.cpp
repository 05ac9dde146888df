#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcu/rng.hpp"

namespace testsupport {

using pcu::Vec3;

pcu::NeighborGraph brute_knn(std::span<const Vec3> points, int k) {
    const int n = static_cast<int>(points.size());
    pcu::NeighborGraph g;
    g.k = k;
    g.indices.resize(static_cast<std::size_t>(n) * k);
    g.distances.resize(static_cast<std::size_t>(n) * k);
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> all;
        all.reserve(n - 1);
        for (int j = 0; j < n; ++j)
            if (j != i) all.emplace_back(pcu::dist2(points[i], points[j]), j);
        std::sort(all.begin(), all.end());
        for (int j = 0; j < k; ++j) {
            g.indices[static_cast<std::size_t>(i) * k + j] = all[j].second;
            g.distances[static_cast<std::size_t>(i) * k + j] = std::sqrt(all[j].first);
        }
    }
    return g;
}

namespace {
double nearest_dist(const Vec3& p, std::span<const Vec3> set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : set) best = std::min(best, pcu::dist2(p, q));
    return std::sqrt(best);
}
}  // namespace

double brute_chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
    double sum_ab = 0.0, sum_ba = 0.0;
    for (const Vec3& p : a) sum_ab += nearest_dist(p, b);
    for (const Vec3& q : b) sum_ba += nearest_dist(q, a);
    return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

double brute_hausdorff(std::span<const Vec3> a, std::span<const Vec3> b) {
    double max_ab = 0.0, max_ba = 0.0;
    for (const Vec3& p : a) max_ab = std::max(max_ab, nearest_dist(p, b));
    for (const Vec3& q : b) max_ba = std::max(max_ba, nearest_dist(q, a));
    return std::max(max_ab, max_ba);
}

namespace {
double point_segment_dist2(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double denom = pcu::norm2(ab);
    double t = denom > 0.0 ? std::clamp(pcu::dot(p - a, ab) / denom, 0.0, 1.0) : 0.0;
    return pcu::dist2(p, a + ab * t);
}
}  // namespace

double ref_point_triangle_dist(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Project onto the triangle plane; if the projection lies inside (strictly
    // by barycentric coordinates), the plane distance is the answer.
    Vec3 n = pcu::cross(b - a, c - a);
    double nn = pcu::norm2(n);
    if (nn > 0.0) {
        double t = pcu::dot(p - a, n) / nn;
        Vec3 proj = p - n * t;
        // Barycentric coordinates of proj.
        Vec3 v0 = b - a, v1 = c - a, v2 = proj - a;
        double d00 = pcu::dot(v0, v0), d01 = pcu::dot(v0, v1), d11 = pcu::dot(v1, v1);
        double d20 = pcu::dot(v2, v0), d21 = pcu::dot(v2, v1);
        double denom = d00 * d11 - d01 * d01;
        if (denom > 0.0) {
            double v = (d11 * d20 - d01 * d21) / denom;
            double w = (d00 * d21 - d01 * d20) / denom;
            double u = 1.0 - v - w;
            if (u >= 0.0 && v >= 0.0 && w >= 0.0) return pcu::dist(p, proj);
        }
    }
    double d2 = std::min({point_segment_dist2(p, a, b), point_segment_dist2(p, b, c),
                          point_segment_dist2(p, c, a)});
    return std::sqrt(d2);
}

double brute_p2f(const Vec3& p, const pcu::TriangleMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces)
        best = std::min(best, ref_point_triangle_dist(p, mesh.vertices[f[0]], mesh.vertices[f[1]],
                                                      mesh.vertices[f[2]]));
    return best;
}

double min_pairwise_dist(std::span<const Vec3> points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::min(best, pcu::dist2(points[i], points[j]));
    return std::sqrt(best);
}

std::vector<Vec3> random_cube_points(int n, std::uint64_t seed, double half) {
    pcu::rng::Stream s(pcu::rng::key(seed, 0xC0BEull));
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts)
        p = {(2.0 * s.next_uniform() - 1.0) * half, (2.0 * s.next_uniform() - 1.0) * half,
             (2.0 * s.next_uniform() - 1.0) * half};
    return pts;
}

std::vector<Vec3> random_sphere_points(int n, std::uint64_t seed, double radius,
                                       double noise_sigma) {
    pcu::rng::Stream s(pcu::rng::key(seed, 0x5BEEull));
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) {
        Vec3 g{s.next_normal(), s.next_normal(), s.next_normal()};
        double len = pcu::norm(g);
        if (len == 0.0) len = 1.0;
        p = g * (radius / len);
        if (noise_sigma > 0.0)
            p += Vec3{s.next_normal(), s.next_normal(), s.next_normal()} * noise_sigma;
    }
    return pts;
}

pcu::TriangleMesh make_cube_mesh(double half) {
    pcu::TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1 ? half : -half), (i & 2 ? half : -half),
                              (i & 4 ? half : -half)});
    const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                             {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    return m;
}

pcu::TriangleMesh make_sphere_mesh(int rings, int segments, double radius) {
    using std::numbers::pi;
    pcu::TriangleMesh m;
    m.vertices.push_back({0, 0, radius});
    for (int r = 1; r < rings; ++r) {
        double phi = pi * r / rings;
        for (int s = 0; s < segments; ++s) {
            double theta = 2.0 * pi * s / segments;
            m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                                  radius * std::sin(phi) * std::sin(theta),
                                  radius * std::cos(phi)});
        }
    }
    m.vertices.push_back({0, 0, -radius});
    const int last = static_cast<int>(m.vertices.size()) - 1;
    auto ring_v = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    for (int s = 0; s < segments; ++s) m.faces.push_back({0, ring_v(1, s), ring_v(1, s + 1)});
    for (int r = 1; r < rings - 1; ++r)
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({ring_v(r, s), ring_v(r + 1, s), ring_v(r + 1, s + 1)});
            m.faces.push_back({ring_v(r, s), ring_v(r + 1, s + 1), ring_v(r, s + 1)});
        }
    for (int s = 0; s < segments; ++s)
        m.faces.push_back({last, ring_v(rings - 1, s + 1), ring_v(rings - 1, s)});
    return m;
}

pcu::TriangleMesh make_torus_mesh(int rings, int segments, double major, double minor) {
    using std::numbers::pi;
    pcu::TriangleMesh m;
    for (int r = 0; r < rings; ++r) {
        double u = 2.0 * pi * r / rings;
        for (int s = 0; s < segments; ++s) {
            double v = 2.0 * pi * s / segments;
            m.vertices.push_back({(major + minor * std::cos(v)) * std::cos(u),
                                  (major + minor * std::cos(v)) * std::sin(u),
                                  minor * std::sin(v)});
        }
    }
    auto vid = [&](int r, int s) { return (r % rings) * segments + (s % segments); };
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({vid(r, s), vid(r + 1, s), vid(r + 1, s + 1)});
            m.faces.push_back({vid(r, s), vid(r + 1, s + 1), vid(r, s + 1)});
        }
    return m;
}

}  // namespace testsupport
