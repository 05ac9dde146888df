#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcu/tensor.hpp"
#include "pcu/vec3.hpp"

namespace pcu::loss {

struct LossWeights {
    double alpha = 100.0;  // reconstruction
    double beta = 10.0;    // uniformity
    double gamma = 0.01;   // self-projection
};

struct UniformConfig {
    int m_seeds = 8;
    std::vector<double> p_values{0.004, 0.006, 0.008, 0.010, 0.012};
};

struct SelfProjectionConfig {
    int k = 6;
};

// Symmetric chamfer distance under the mean convention, un-squared norms.
// Differentiable through the min via the selected nearest pair.
ad::Tensor chamfer(const ad::Tensor& s, const ad::Tensor& q);

// ---- uniform term ----------------------------------------------------------

// Expected point count inside a disk of area fraction p = r_d^2 on the unit
// sphere: n_hat = n * r_d^2.
double expected_count(int n_points, double p);

// Expected point-to-neighbor spacing for `count` points filling the disk of
// radius r_d hexagonally: sqrt(2*pi*r_d^2 / (count*sqrt(3))).
double expected_spacing(int count, double r_d);

// Chi-square contribution of one region: U_number * U_distance. Regions with
// fewer than two members carry U_distance = 0.
double uniform_region_contribution(int count, std::span<const double> nn_dists, double n_hat,
                                   double d_hat);

struct UniformRegions {
    std::vector<int> seeds;
    std::vector<std::vector<int>> members;  // strict ball membership, seed included
};

// FPS-seeded ball regions of radius r_d, starting from start_index.
UniformRegions build_uniform_regions(std::span<const Vec3> points, double r_d, int m_seeds,
                                     int start_index);

// Start index drawn from the stream keyed by draw_key; the training loss
// redraws this every step.
int draw_uniform_start(int n_points, std::uint64_t draw_key);

// Order-independent start for metric evaluation: the point farthest from the
// centroid (ties to the lowest index), so the reported score is invariant
// under permutation and rotation.
int geometric_start(std::span<const Vec3> points);

// Chi-square uniform term, mean over all p values. Counts and expectations
// are constants of the forward pass; gradient flows through the
// nearest-neighbor distances only.
ad::Tensor uniform_term(const ad::Tensor& t, const UniformConfig& cfg, std::uint64_t draw_key);

// Plain-double evaluation of the same statistic for one p (metrics path).
double uniform_statistic(std::span<const Vec3> points, double p, int m_seeds, int start_index);

// ---- self-projection -------------------------------------------------------

// Pulls each point's squared-distance field toward its neighborhood
// centroid's: sum |d2(q_i,q_j) - d2(qbar_i,q_j)| / (1 + d2(q_i,q_j)),
// normalized by N*k. Neighborhoods by k-NN, self excluded.
ad::Tensor self_projection_term(const ad::Tensor& q, const SelfProjectionConfig& cfg);

// Same with caller-supplied neighborhoods (row-major n*k neighbor indices).
ad::Tensor self_projection_term(const ad::Tensor& q, std::span<const int> neighbors, int k);

// ---- joint loss -------------------------------------------------------------

struct JointLossParts {
    ad::Tensor total;
    double rec = 0.0;  // unweighted term values; 0 when the weight is 0
    double uni = 0.0;
    double sp = 0.0;
};

// alpha * mean_j CD(S, Q_j) + beta * uniform(T) + gamma * mean_j SP(Q_j).
// Terms with zero weight are skipped entirely.
JointLossParts joint_loss(const ad::Tensor& s, std::span<const ad::Tensor> q_list,
                          const ad::Tensor& t, const LossWeights& weights,
                          const UniformConfig& uniform_cfg, const SelfProjectionConfig& sp_cfg,
                          std::uint64_t draw_key);

}  // namespace pcu::loss
