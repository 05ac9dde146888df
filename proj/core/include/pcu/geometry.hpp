#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcu/types.hpp"

namespace pcu::geom {

// Exact Euclidean k-NN per point, self excluded, ties broken by lower index.
// Throws std::invalid_argument if k >= point count or k < 1.
NeighborGraph knn(std::span<const Vec3> points, int k);

// k-NN over generic row-major feature rows (n rows of `dim` doubles); the
// feature-space analogue of knn() with identical ordering rules.
NeighborGraph knn_rows(std::span<const double> rows, int n, int dim, int k);

// Farthest point sampling: first pick is start_index, each next pick
// maximizes the min distance to the selected set, ties to the lowest index.
std::vector<int> fps(std::span<const Vec3> points, int m, int start_index);

// Centers points at their centroid and scales by the max norm so the patch
// fits the unit sphere; center/scale compose with any transform already
// recorded on the patch, so denormalize() always maps back to the original
// frame. Throws DegeneratePatchError when all points coincide.
Patch normalize(Patch patch);

std::vector<Vec3> denormalize(const Patch& patch);

// r independent FPS reorderings of N/r points each, with start indices drawn
// from the counter stream keyed by (seed, run). Coarse patches keep the
// parent's center/scale; source_indices index into the parent patch.
std::vector<Patch> downsample_coarse(const Patch& patch, int r, std::uint64_t seed);

struct GeodesicPatchStats {
    int fallback_points = 0;   // points filled by Euclidean distance
    int affected_patches = 0;  // patches that needed the fallback
};

// FPS-seeded patches by graph-geodesic proximity: Dijkstra over the
// symmetrized graph_k-NN graph, patch = patch_size nearest reachable points,
// Euclidean fill when a component runs out. Patches come back normalized.
std::vector<Patch> geodesic_patches(const PointCloud& cloud, int n_patches, int patch_size,
                                    int graph_k, GeodesicPatchStats* stats = nullptr);

}  // namespace pcu::geom
