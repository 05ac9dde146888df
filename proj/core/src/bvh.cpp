#include "pcu/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pcu {

// Ericson-style region classification.
double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return dist2(p, a);

    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return dist2(p, b);

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return dist2(p, a + ab * v);
    }

    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return dist2(p, c);

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return dist2(p, a + ac * w);
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return dist2(p, b + (c - b) * w);
    }

    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return dist2(p, a + ab * v + ac * w);
}

namespace {
constexpr int kLeafFaces = 4;
}

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    if (mesh.face_count() == 0) throw std::invalid_argument("TriangleBvh: empty mesh");
    order_.resize(mesh.face_count());
    std::iota(order_.begin(), order_.end(), 0);
    centroids_.resize(mesh.face_count());
    for (int f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        centroids_[f] = (mesh.vertices[face[0]] + mesh.vertices[face[1]] +
                         mesh.vertices[face[2]]) /
                        3.0;
    }
    nodes_.reserve(2 * mesh.face_count() / kLeafFaces + 2);
    root_ = build(0, mesh.face_count());
}

int TriangleBvh::build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = lo * -1.0;
    for (int i = begin; i < end; ++i) {
        const auto& face = mesh_->faces[order_[i]];
        for (int v = 0; v < 3; ++v) {
            const Vec3& p = mesh_->vertices[face[v]];
            for (int a = 0; a < 3; ++a) {
                lo.set(a, std::min(lo[a], p[a]));
                hi.set(a, std::max(hi[a], p[a]));
            }
        }
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;

    if (end - begin <= kLeafFaces) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    Vec3 clo = centroids_[order_[begin]], chi = clo;
    for (int i = begin + 1; i < end; ++i)
        for (int a = 0; a < 3; ++a) {
            clo.set(a, std::min(clo[a], centroids_[order_[i]][a]));
            chi.set(a, std::max(chi[a], centroids_[order_[i]][a]));
        }
    int axis = 0;
    double extent = chi[0] - clo[0];
    for (int a = 1; a < 3; ++a)
        if (chi[a] - clo[a] > extent) {
            extent = chi[a] - clo[a];
            axis = a;
        }
    if (extent == 0.0) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         double ca = centroids_[a][axis], cb = centroids_[b][axis];
                         return ca != cb ? ca < cb : a < b;
                     });
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

double TriangleBvh::box_dist2(const Node& n, const Vec3& p) const {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        double v = p[a];
        double d = v < n.lo[a] ? n.lo[a] - v : (v > n.hi[a] ? v - n.hi[a] : 0.0);
        d2 += d * d;
    }
    return d2;
}

double TriangleBvh::closest_dist2(const Vec3& query) const {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        const Node& n = nodes_[id];
        if (box_dist2(n, query) >= best) continue;
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                const auto& f = mesh_->faces[order_[i]];
                best = std::min(best, point_triangle_dist2(query, mesh_->vertices[f[0]],
                                                           mesh_->vertices[f[1]],
                                                           mesh_->vertices[f[2]]));
            }
            continue;
        }
        // Near child last so it pops first.
        double dl = box_dist2(nodes_[n.left], query);
        double dr = box_dist2(nodes_[n.right], query);
        if (dl < dr) {
            stack.push_back(n.right);
            stack.push_back(n.left);
        } else {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    return best;
}

double TriangleBvh::closest_dist(const Vec3& query) const { return std::sqrt(closest_dist2(query)); }

}  // namespace pcu
