#include "pcu/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pcu {

namespace {
constexpr int kLeafSize = 8;

struct Candidate {
    double d2;
    int idx;
    // "worse" ordering: larger distance first, then larger index.
    bool operator<(const Candidate& o) const {
        return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
    }
};
}  // namespace

KdTree3::KdTree3(std::span<const Vec3> points)
    : points_(points.begin(), points.end()), order_(points.size()) {
    if (points.empty()) throw std::invalid_argument("KdTree3: empty point set");
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points.size()));
}

int KdTree3::build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = lo * -1.0;
    for (int i = begin; i < end; ++i) {
        const Vec3& p = points_[order_[i]];
        for (int a = 0; a < 3; ++a) {
            lo.set(a, std::min(lo[a], p[a]));
            hi.set(a, std::max(hi[a], p[a]));
        }
    }
    int axis = 0;
    double extent = hi[0] - lo[0];
    for (int a = 1; a < 3; ++a) {
        if (hi[a] - lo[a] > extent) {
            extent = hi[a] - lo[a];
            axis = a;
        }
    }
    if (extent == 0.0) {  // all points coincide; keep as a leaf
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         double pa = points_[a][axis], pb = points_[b][axis];
                         return pa != pb ? pa < pb : a < b;
                     });
    Node& n = nodes_[id];
    n.axis = axis;
    n.split = points_[order_[mid]][axis];
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

int KdTree3::nearest(const Vec3& query) const {
    std::vector<int> idx;
    std::vector<double> d2;
    k_nearest(query, 1, idx, d2);
    return idx[0];
}

double KdTree3::nearest_dist2(const Vec3& query) const {
    std::vector<int> idx;
    std::vector<double> d2;
    k_nearest(query, 1, idx, d2);
    return d2[0];
}

void KdTree3::k_nearest(const Vec3& query, int k, std::vector<int>& out_indices,
                        std::vector<double>& out_dist2, int exclude) const {
    const int n = static_cast<int>(points_.size()) - (exclude >= 0 ? 1 : 0);
    if (k < 1 || k > n) throw std::invalid_argument("KdTree3::k_nearest: bad k");

    // Bounded max-heap of the best k candidates, worst on top.
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    auto worse = [](const Candidate& a, const Candidate& b) { return a < b; };

    auto consider = [&](int i) {
        if (i == exclude) return;
        Candidate c{dist2(query, points_[i]), i};
        if (static_cast<int>(heap.size()) < k) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    };

    // Iterative traversal, near child first. Descend when the heap is not
    // full or when the split plane could still hold an equal-distance
    // candidate with a lower index (hence <=, not <).
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[id];
        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) consider(order_[i]);
            continue;
        }
        double delta = query[node.axis] - node.split;
        int near = delta < 0 ? node.left : node.right;
        int far = delta < 0 ? node.right : node.left;
        bool full = static_cast<int>(heap.size()) == k;
        if (!full || delta * delta <= heap.front().d2) stack.push_back(far);
        stack.push_back(near);
    }

    std::sort(heap.begin(), heap.end());
    out_indices.resize(k);
    out_dist2.resize(k);
    for (int i = 0; i < k; ++i) {
        out_indices[i] = heap[i].idx;
        out_dist2[i] = heap[i].d2;
    }
}

}  // namespace pcu
