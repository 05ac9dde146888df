#pragma once

#include <span>
#include <vector>

#include "pcu/vec3.hpp"

namespace pcu {

// Static kd-tree over 3-D points. Exact queries: results match a brute-force
// scan bit-for-bit, including the (distance, index) tie-break order.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::span<const Vec3> points);

    bool empty() const { return nodes_.empty(); }

    // Index of the nearest point; ties resolved to the lowest index.
    int nearest(const Vec3& query) const;

    // Squared distance to the nearest point.
    double nearest_dist2(const Vec3& query) const;

    // k nearest points sorted by (distance, index) ascending. exclude is an
    // optional point index to skip (the query itself for in-set queries).
    void k_nearest(const Vec3& query, int k, std::vector<int>& out_indices,
                   std::vector<double>& out_dist2, int exclude = -1) const;

private:
    struct Node {
        double split = 0.0;
        int axis = -1;    // -1 marks a leaf
        int left = -1;    // child node ids
        int right = -1;
        int begin = 0;    // leaf range into order_
        int end = 0;
    };

    int build(int begin, int end);

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace pcu
