#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcu/types.hpp"

namespace pcu::metrics {

// Evaluation-only metrics: no gradient graphs, kd-tree / BVH accelerated,
// guaranteed equal to their brute-force counterparts.

double cd_metric(std::span<const Vec3> a, std::span<const Vec3> b);
double hd_metric(std::span<const Vec3> a, std::span<const Vec3> b);

struct P2fResult {
    double mean = 0.0;
    std::vector<double> per_point;
};
P2fResult p2f(std::span<const Vec3> points, const TriangleMesh& mesh);

// The uniform-term statistic per area fraction p. FPS seeding starts at the
// point farthest from the centroid, so the score is a pure function of the
// point set: invariant under permutation and rotation, reproducible across
// runs. Input must be normalized to the unit sphere.
std::map<double, double> uniformity_metric(std::span<const Vec3> points,
                                           std::span<const double> p_values, int m_seeds = 50);

struct MetricReport {
    double cd = 0.0;
    double hd = 0.0;
    double p2f_mean = -1.0;  // negative = not evaluated (no mesh given)
    std::map<double, double> uniformity;
    int pred_points = 0;
    int gt_points = 0;

    bool has_p2f() const { return p2f_mean >= 0.0; }

    // Flat "key value" lines, one metric per line.
    std::string to_text() const;
    // JSON object: {"cd":..., "hd":..., "p2f_mean":..., "uniformity":{"p":score},
    //               "pred_points":..., "gt_points":...}
    std::string to_json() const;
};

MetricReport evaluate(std::span<const Vec3> pred, std::span<const Vec3> gt,
                      const TriangleMesh* mesh, std::span<const double> p_values, int m_seeds = 50);

}  // namespace pcu::metrics
