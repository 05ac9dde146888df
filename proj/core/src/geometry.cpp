#include "pcu/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "pcu/errors.hpp"
#include "pcu/kdtree.hpp"
#include "pcu/rng.hpp"

namespace pcu::geom {

namespace {

void check_finite(std::span<const Vec3> points) {
    for (const Vec3& p : points)
        if (!is_finite(p)) throw std::invalid_argument("point set contains non-finite coordinates");
}

double row_dist2(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

}  // namespace

NeighborGraph knn(std::span<const Vec3> points, int k) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k >= n)
        throw std::invalid_argument("knn: k must satisfy 1 <= k < point count");
    check_finite(points);

    KdTree3 tree(points);
    NeighborGraph g;
    g.k = k;
    g.indices.resize(static_cast<std::size_t>(n) * k);
    g.distances.resize(static_cast<std::size_t>(n) * k);
    std::vector<int> idx;
    std::vector<double> d2;
    for (int i = 0; i < n; ++i) {
        tree.k_nearest(points[i], k, idx, d2, i);
        for (int j = 0; j < k; ++j) {
            g.indices[static_cast<std::size_t>(i) * k + j] = idx[j];
            g.distances[static_cast<std::size_t>(i) * k + j] = std::sqrt(d2[j]);
        }
    }
    return g;
}

NeighborGraph knn_rows(std::span<const double> rows, int n, int dim, int k) {
    if (n * dim != static_cast<int>(rows.size()))
        throw std::invalid_argument("knn_rows: size does not match n*dim");
    if (k < 1 || k >= n)
        throw std::invalid_argument("knn_rows: k must satisfy 1 <= k < row count");

    NeighborGraph g;
    g.k = k;
    g.indices.resize(static_cast<std::size_t>(n) * k);
    g.distances.resize(static_cast<std::size_t>(n) * k);
    std::vector<std::pair<double, int>> cand(n - 1);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cand[m++] = {row_dist2(rows.data() + static_cast<std::size_t>(i) * dim,
                                   rows.data() + static_cast<std::size_t>(j) * dim, dim),
                         j};
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int j = 0; j < k; ++j) {
            g.indices[static_cast<std::size_t>(i) * k + j] = cand[j].second;
            g.distances[static_cast<std::size_t>(i) * k + j] = std::sqrt(cand[j].first);
        }
    }
    return g;
}

std::vector<int> fps(std::span<const Vec3> points, int m, int start_index) {
    const int n = static_cast<int>(points.size());
    if (m < 1 || m > n) throw std::invalid_argument("fps: m must satisfy 1 <= m <= point count");
    if (start_index < 0 || start_index >= n)
        throw std::invalid_argument("fps: start_index out of range");

    std::vector<int> picks;
    picks.reserve(m);
    picks.push_back(start_index);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    for (int round = 1; round < m; ++round) {
        const Vec3& last = points[picks.back()];
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            double d = dist2(points[i], last);
            if (d < min_d2[i]) min_d2[i] = d;
            if (min_d2[i] > best_d2) {  // strict > keeps the lowest index on ties
                best_d2 = min_d2[i];
                best = i;
            }
        }
        picks.push_back(best);
    }
    return picks;
}

Patch normalize(Patch patch) {
    const int n = patch.size();
    if (n == 0) throw std::invalid_argument("normalize: empty patch");
    check_finite(patch.points);

    Vec3 centroid{};
    for (const Vec3& p : patch.points) centroid += p;
    centroid = centroid / static_cast<double>(n);

    double max_norm = 0.0;
    for (Vec3& p : patch.points) {
        p -= centroid;
        max_norm = std::max(max_norm, norm(p));
    }
    if (max_norm == 0.0) throw DegeneratePatchError("normalize: all patch points coincide");
    for (Vec3& p : patch.points) p = p / max_norm;

    // Compose with whatever frame the patch was already expressed in.
    patch.center += centroid * patch.scale;
    patch.scale *= max_norm;
    return patch;
}

std::vector<Vec3> denormalize(const Patch& patch) {
    std::vector<Vec3> out;
    out.reserve(patch.points.size());
    for (const Vec3& p : patch.points) out.push_back(p * patch.scale + patch.center);
    return out;
}

std::vector<Patch> downsample_coarse(const Patch& patch, int r, std::uint64_t seed) {
    const int n = patch.size();
    if (r < 1 || n % r != 0)
        throw std::invalid_argument("downsample_coarse: r must divide the patch size");
    const int coarse_n = n / r;

    std::vector<Patch> out;
    out.reserve(r);
    std::vector<int> used_starts;
    for (int run = 0; run < r; ++run) {
        // Per-run stream keeps runs reproducible independently; collisions
        // advance that run's own stream so the r start indices are distinct.
        rng::Stream stream(rng::key(seed, rng::kTagCoarse, run));
        int start = stream.next_index(n);
        while (std::find(used_starts.begin(), used_starts.end(), start) != used_starts.end())
            start = stream.next_index(n);
        used_starts.push_back(start);
        std::vector<int> picks = fps(patch.points, coarse_n, start);
        Patch coarse;
        coarse.center = patch.center;
        coarse.scale = patch.scale;
        coarse.points.reserve(coarse_n);
        coarse.source_indices = picks;
        for (int i : picks) coarse.points.push_back(patch.points[i]);
        out.push_back(std::move(coarse));
    }
    return out;
}

std::vector<Patch> geodesic_patches(const PointCloud& cloud, int n_patches, int patch_size,
                                    int graph_k, GeodesicPatchStats* stats) {
    const int n = cloud.size();
    if (n < 1) throw std::invalid_argument("geodesic_patches: empty cloud");
    if (patch_size < 1 || patch_size > n)
        throw std::invalid_argument("geodesic_patches: patch_size must satisfy 1 <= size <= points");
    if (n_patches < 1) throw std::invalid_argument("geodesic_patches: n_patches must be >= 1");
    if (graph_k < 1) throw std::invalid_argument("geodesic_patches: graph_k must be >= 1");
    check_finite(cloud.points);

    // Symmetrized k-NN graph for the geodesic metric.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    if (n > 1) {
        int gk = std::min(graph_k, n - 1);
        NeighborGraph g = knn(cloud.points, gk);
        for (int i = 0; i < n; ++i) {
            auto nbrs = g.neighbors(i);
            auto dists = g.neighbor_distances(i);
            for (int j = 0; j < gk; ++j) {
                adj[i].emplace_back(nbrs[j], dists[j]);
                adj[nbrs[j]].emplace_back(i, dists[j]);
            }
        }
    }

    std::vector<int> seeds = fps(cloud.points, n_patches, 0);

    std::vector<Patch> patches;
    patches.reserve(n_patches);
    std::vector<double> geo(n);
    for (int seed : seeds) {
        std::fill(geo.begin(), geo.end(), std::numeric_limits<double>::infinity());
        geo[seed] = 0.0;
        using QItem = std::pair<double, int>;
        std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
        pq.emplace(0.0, seed);
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > geo[u]) continue;
            for (auto [v, w] : adj[u]) {
                double nd = d + w;
                if (nd < geo[v]) {
                    geo[v] = nd;
                    pq.emplace(nd, v);
                }
            }
        }

        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return geo[a] != geo[b] ? geo[a] < geo[b] : a < b;
        });

        Patch patch;
        patch.points.reserve(patch_size);
        patch.source_indices.reserve(patch_size);
        int taken = 0;
        for (int i = 0; i < n && taken < patch_size; ++i) {
            if (!std::isfinite(geo[order[i]])) break;
            patch.source_indices.push_back(order[i]);
            ++taken;
        }
        if (taken < patch_size) {
            // Disconnected component: fill with Euclidean-nearest unreached points.
            std::vector<int> rest;
            for (int i = 0; i < n; ++i)
                if (!std::isfinite(geo[i])) rest.push_back(i);
            const Vec3& s = cloud.points[seed];
            std::sort(rest.begin(), rest.end(), [&](int a, int b) {
                double da = dist2(cloud.points[a], s), db = dist2(cloud.points[b], s);
                return da != db ? da < db : a < b;
            });
            int need = patch_size - taken;
            patch.source_indices.insert(patch.source_indices.end(), rest.begin(),
                                        rest.begin() + need);
            if (stats) {
                stats->fallback_points += need;
                stats->affected_patches += 1;
            }
        }
        for (int i : patch.source_indices) patch.points.push_back(cloud.points[i]);
        patches.push_back(normalize(std::move(patch)));
    }
    return patches;
}

}  // namespace pcu::geom
