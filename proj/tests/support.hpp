#pragma once

// Test-only reference implementations and data generators. Everything here is
// written independently of the library code paths it checks: brute-force
// scans, scalar loops, closed-form surfaces.

#include <cstdint>
#include <span>
#include <vector>

#include "pcu/types.hpp"
#include "pcu/vec3.hpp"

namespace testsupport {

// O(n^2) k-NN with full stable sort by (distance, index).
pcu::NeighborGraph brute_knn(std::span<const pcu::Vec3> points, int k);

// Brute-force symmetric chamfer (mean convention) and Hausdorff.
double brute_chamfer(std::span<const pcu::Vec3> a, std::span<const pcu::Vec3> b);
double brute_hausdorff(std::span<const pcu::Vec3> a, std::span<const pcu::Vec3> b);

// Reference point-to-triangle distance by clamped plane projection plus
// explicit edge/vertex checks; deliberately a different construction from the
// library's region-based routine.
double ref_point_triangle_dist(const pcu::Vec3& p, const pcu::Vec3& a, const pcu::Vec3& b,
                               const pcu::Vec3& c);
double brute_p2f(const pcu::Vec3& p, const pcu::TriangleMesh& mesh);

double min_pairwise_dist(std::span<const pcu::Vec3> points);

// Deterministic point generators.
std::vector<pcu::Vec3> random_cube_points(int n, std::uint64_t seed, double half = 1.0);
std::vector<pcu::Vec3> random_sphere_points(int n, std::uint64_t seed, double radius = 1.0,
                                            double noise_sigma = 0.0);

// Primitive meshes for sampling and P2F tests.
pcu::TriangleMesh make_cube_mesh(double half = 1.0);
pcu::TriangleMesh make_sphere_mesh(int rings, int segments, double radius = 1.0);
pcu::TriangleMesh make_torus_mesh(int rings, int segments, double major = 1.0,
                                  double minor = 0.35);

}  // namespace testsupport
