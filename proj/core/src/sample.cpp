#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pcu/geometry.hpp"
#include "pcu/io.hpp"
#include "pcu/rng.hpp"

namespace pcu::io {

namespace {

struct AreaSampler {
    const TriangleMesh* mesh;
    std::vector<double> cumulative;
    double total = 0.0;

    explicit AreaSampler(const TriangleMesh& m) : mesh(&m) {
        cumulative.reserve(m.face_count());
        for (int f = 0; f < m.face_count(); ++f) {
            total += triangle_area(m, f);
            cumulative.push_back(total);
        }
        if (total <= 0.0) throw std::invalid_argument("sample_mesh: zero-area mesh");
    }

    Vec3 draw(rng::Stream& stream) const {
        double u = stream.next_uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        int f = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                          cumulative.size() - 1));
        const auto& face = mesh->faces[f];
        // Uniform barycentric point via the sqrt trick.
        double su = std::sqrt(stream.next_uniform());
        double v = stream.next_uniform();
        const Vec3 &a = mesh->vertices[face[0]], &b = mesh->vertices[face[1]],
                   &c = mesh->vertices[face[2]];
        return a * (1.0 - su) + b * (su * (1.0 - v)) + c * (su * v);
    }
};

// Hash grid with cell size = rejection radius; 27-cell neighborhood scan.
class HashGrid {
public:
    explicit HashGrid(double cell) : cell_(cell) {}

    bool too_close(const Vec3& p, const std::vector<Vec3>& accepted, double r2) const {
        auto [cx, cy, cz] = cell_of(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
                    if (it == cells_.end()) continue;
                    for (int i : it->second)
                        if (dist2(p, accepted[i]) < r2) return true;
                }
        return false;
    }

    void insert(const Vec3& p, int index) {
        auto [cx, cy, cz] = cell_of(p);
        cells_[key(cx, cy, cz)].push_back(index);
    }

private:
    std::tuple<long, long, long> cell_of(const Vec3& p) const {
        return {static_cast<long>(std::floor(p.x / cell_)),
                static_cast<long>(std::floor(p.y / cell_)),
                static_cast<long>(std::floor(p.z / cell_))};
    }
    static std::uint64_t key(long x, long y, long z) {
        return rng::mix64(static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull ^
                          rng::mix64(static_cast<std::uint64_t>(y)) ^
                          rng::mix64(static_cast<std::uint64_t>(z) * 0xC2B2AE3D27D4EB4Full));
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

std::vector<Vec3> dart_throw(const AreaSampler& sampler, double radius, int target,
                             std::uint64_t key) {
    rng::Stream stream(key);
    std::vector<Vec3> accepted;
    HashGrid grid(radius);
    const double r2 = radius * radius;
    const long budget = 40L * target;
    for (long i = 0; i < budget; ++i) {
        Vec3 p = sampler.draw(stream);
        if (grid.too_close(p, accepted, r2)) continue;
        grid.insert(p, static_cast<int>(accepted.size()));
        accepted.push_back(p);
        if (static_cast<int>(accepted.size()) > 2 * target) break;  // radius clearly too small
    }
    return accepted;
}

PointCloud sample_area_weighted(const TriangleMesh& mesh, int n, std::uint64_t seed) {
    AreaSampler sampler(mesh);
    rng::Stream stream(rng::key(seed, rng::kTagSample));
    PointCloud cloud;
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i) cloud.points.push_back(sampler.draw(stream));
    return cloud;
}

PointCloud sample_poisson(const TriangleMesh& mesh, int n, std::uint64_t seed) {
    AreaSampler sampler(mesh);
    // Hexagonal-packing spacing for n points over the total area.
    const double r0 = std::sqrt(2.0 * sampler.total / (std::sqrt(3.0) * n));
    double lo = r0 / 4.0, hi = r0 * 2.5;

    std::vector<Vec3> accepted;
    const int tol = std::max(1, static_cast<int>(0.02 * n));
    for (int iter = 0; iter < 22; ++iter) {
        double r = 0.5 * (lo + hi);
        accepted = dart_throw(sampler, r, n, rng::key(seed, rng::kTagSample, iter));
        int count = static_cast<int>(accepted.size());
        if (std::abs(count - n) <= tol) break;
        if (count > n)
            lo = r;  // radius too permissive
        else
            hi = r;
    }

    const int count = static_cast<int>(accepted.size());
    if (count > n) {
        // FPS trim keeps the best-spread subset.
        auto picks = geom::fps(accepted, n, 0);
        PointCloud out;
        out.points.reserve(n);
        for (int i : picks) out.points.push_back(accepted[i]);
        return out;
    }
    if (count < n) {
        // Farthest-candidate top-up from a fresh area-weighted pool.
        rng::Stream stream(rng::key(seed, rng::kTagSample, 0xF111u));
        const int pool_size = std::max(4 * (n - count), 256);
        std::vector<Vec3> pool(pool_size);
        for (Vec3& p : pool) p = sampler.draw(stream);
        std::vector<double> min_d2(pool_size, std::numeric_limits<double>::infinity());
        for (int i = 0; i < pool_size; ++i)
            for (const Vec3& a : accepted) min_d2[i] = std::min(min_d2[i], dist2(pool[i], a));
        while (static_cast<int>(accepted.size()) < n) {
            int best = 0;
            for (int i = 1; i < pool_size; ++i)
                if (min_d2[i] > min_d2[best]) best = i;
            accepted.push_back(pool[best]);
            min_d2[best] = -1.0;
            for (int i = 0; i < pool_size; ++i)
                if (min_d2[i] > 0.0)
                    min_d2[i] = std::min(min_d2[i], dist2(pool[i], accepted.back()));
        }
    }
    PointCloud out;
    out.points = std::move(accepted);
    return out;
}

}  // namespace

PointCloud sample_mesh(const TriangleMesh& mesh, int n, SampleMode mode, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_mesh: n must be >= 1");
    if (mesh.face_count() == 0) throw std::invalid_argument("sample_mesh: mesh has no faces");
    return mode == SampleMode::kAreaWeighted ? sample_area_weighted(mesh, n, seed)
                                             : sample_poisson(mesh, n, seed);
}

}  // namespace pcu::io
