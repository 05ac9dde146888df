#pragma once

#include <array>
#include <span>
#include <vector>

#include "pcu/vec3.hpp"

namespace pcu {

struct PointCloud {
    std::vector<Vec3> points;

    int size() const { return static_cast<int>(points.size()); }
};

// A local neighborhood of a point cloud, the unit of training. center/scale
// record the transform applied by normalize() so it can be inverted exactly.
struct Patch {
    std::vector<Vec3> points;
    Vec3 center{};
    double scale = 1.0;
    std::vector<int> source_indices;  // into the parent cloud; empty for generated patches

    int size() const { return static_cast<int>(points.size()); }
};

// k nearest neighbors per query point, self excluded, sorted by ascending
// distance with ties broken by lower index. Row-major n*k layout.
struct NeighborGraph {
    int k = 0;
    std::vector<int> indices;
    std::vector<double> distances;

    int size() const { return k > 0 ? static_cast<int>(indices.size()) / k : 0; }
    std::span<const int> neighbors(int i) const {
        return {indices.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
    }
    std::span<const double> neighbor_distances(int i) const {
        return {distances.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
    }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
};

double triangle_area(const TriangleMesh& mesh, int face);

// Drops zero-area faces; loaders apply this so downstream consumers can rely
// on every face having a well-defined plane.
TriangleMesh remove_degenerate_faces(const TriangleMesh& mesh);

}  // namespace pcu
