#pragma once

#include <span>
#include <vector>

#include "pcu/types.hpp"
#include "pcu/vec3.hpp"

namespace pcu {

// Exact squared distance from a point to a triangle (interior, edge, and
// vertex regions all handled).
double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Median-split AABB tree over mesh faces for closest-surface queries. The
// returned distances equal a brute-force scan over all faces exactly.
class TriangleBvh {
public:
    explicit TriangleBvh(const TriangleMesh& mesh);

    double closest_dist(const Vec3& query) const;
    double closest_dist2(const Vec3& query) const;

private:
    struct Node {
        Vec3 lo, hi;
        int left = -1, right = -1;  // children, or -1 for a leaf
        int begin = 0, end = 0;     // leaf face range into order_
    };

    int build(int begin, int end);
    double box_dist2(const Node& n, const Vec3& p) const;

    const TriangleMesh* mesh_;
    std::vector<int> order_;
    std::vector<Vec3> centroids_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace pcu
