#include "pcu/loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pcu/geometry.hpp"
#include "pcu/rng.hpp"

namespace pcu::loss {

using ad::Tensor;

namespace {

void check_points(const char* op, const Tensor& t) {
    if (!t.defined() || t.rank() != 2 || t.dim(1) != 3 || t.dim(0) < 1)
        throw std::invalid_argument(std::string(op) + ": input must be a non-empty [N,3] tensor");
}

std::vector<Vec3> as_points(const Tensor& t) {
    std::vector<Vec3> pts(static_cast<std::size_t>(t.dim(0)));
    const auto& d = t.data();
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return pts;
}

// Nearest index in `to` for every point of `from`; ties to the lowest index.
std::vector<std::int64_t> nearest_indices(const std::vector<Vec3>& from,
                                          const std::vector<Vec3>& to) {
    std::vector<std::int64_t> idx(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::int64_t arg = 0;
        for (std::size_t j = 0; j < to.size(); ++j) {
            double d = dist2(from[i], to[j]);
            if (d < best) {
                best = d;
                arg = static_cast<std::int64_t>(j);
            }
        }
        idx[i] = arg;
    }
    return idx;
}

// Mean over rows of || a_i - b_i ||.
Tensor mean_row_norm(const Tensor& a, const Tensor& b) {
    return ad::mean_all(ad::sqrt(ad::reduce_sum(ad::square(ad::sub(a, b)), 1)));
}

}  // namespace

Tensor chamfer(const Tensor& s, const Tensor& q) {
    check_points("chamfer", s);
    check_points("chamfer", q);
    std::vector<Vec3> sp = as_points(s), qp = as_points(q);
    Tensor s_to_q = mean_row_norm(s, ad::gather_rows(q, nearest_indices(sp, qp)));
    Tensor q_to_s = mean_row_norm(q, ad::gather_rows(s, nearest_indices(qp, sp)));
    return ad::add(s_to_q, q_to_s);
}

double expected_count(int n_points, double p) { return static_cast<double>(n_points) * p; }

double expected_spacing(int count, double r_d) {
    return std::sqrt(2.0 * std::numbers::pi * r_d * r_d /
                     (static_cast<double>(count) * std::sqrt(3.0)));
}

double uniform_region_contribution(int count, std::span<const double> nn_dists, double n_hat,
                                   double d_hat) {
    double diff = static_cast<double>(count) - n_hat;
    double u_number = diff * diff / n_hat;
    double u_distance = 0.0;
    for (double d : nn_dists) u_distance += (d - d_hat) * (d - d_hat) / d_hat;
    return u_number * u_distance;
}

int draw_uniform_start(int n_points, std::uint64_t draw_key) {
    rng::Stream stream(draw_key);
    return stream.next_index(n_points);
}

int geometric_start(std::span<const Vec3> points) {
    Vec3 centroid{};
    for (const Vec3& p : points) centroid += p;
    centroid = centroid / static_cast<double>(points.size());
    int best = 0;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double d = dist2(points[i], centroid);
        if (d > best_d2) {
            best_d2 = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

UniformRegions build_uniform_regions(std::span<const Vec3> points, double r_d, int m_seeds,
                                     int start_index) {
    const int n = static_cast<int>(points.size());
    if (m_seeds < 1 || m_seeds > n)
        throw std::invalid_argument("build_uniform_regions: m_seeds must satisfy 1 <= m <= n");

    UniformRegions regions;
    regions.seeds = geom::fps(points, m_seeds, start_index);
    regions.members.resize(regions.seeds.size());
    const double r2 = r_d * r_d;
    for (std::size_t j = 0; j < regions.seeds.size(); ++j) {
        const Vec3& seed = points[regions.seeds[j]];
        for (int i = 0; i < n; ++i)
            if (dist2(points[i], seed) < r2) regions.members[j].push_back(i);
    }
    return regions;
}

namespace {

// Nearest other member for each region member; index pairs into the full set.
void region_nn_pairs(const std::vector<Vec3>& pts, const std::vector<int>& members,
                     std::vector<std::int64_t>& from, std::vector<std::int64_t>& to) {
    from.clear();
    to.clear();
    for (std::size_t a = 0; a < members.size(); ++a) {
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (std::size_t b = 0; b < members.size(); ++b) {
            if (a == b) continue;
            double d = dist2(pts[members[a]], pts[members[b]]);
            if (d < best) {
                best = d;
                arg = members[b];
            }
        }
        from.push_back(members[a]);
        to.push_back(arg);
    }
}

}  // namespace

Tensor uniform_term(const Tensor& t, const UniformConfig& cfg, std::uint64_t draw_key) {
    check_points("uniform_term", t);
    if (cfg.p_values.empty()) throw std::invalid_argument("uniform_term: no p values");
    for (double p : cfg.p_values)
        if (p <= 0.0 || p >= 1.0)
            throw std::invalid_argument("uniform_term: p values must lie in (0,1)");

    const int n = static_cast<int>(t.dim(0));
    std::vector<Vec3> pts = as_points(t);

    Tensor total = Tensor::scalar(0.0);
    std::vector<std::int64_t> from, to;
    for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
        const double p = cfg.p_values[pi];
        const double r_d = std::sqrt(p);
        const double n_hat = expected_count(n, p);
        UniformRegions regions = build_uniform_regions(
            pts, r_d, cfg.m_seeds, draw_uniform_start(n, rng::key(draw_key, pi)));
        for (const auto& members : regions.members) {
            const int count = static_cast<int>(members.size());
            if (count < 2) continue;  // no pair distances: U_distance = 0
            const double diff = static_cast<double>(count) - n_hat;
            const double u_number = diff * diff / n_hat;
            const double d_hat = expected_spacing(count, r_d);
            region_nn_pairs(pts, members, from, to);
            Tensor d = ad::sqrt(ad::reduce_sum(
                ad::square(ad::sub(ad::gather_rows(t, from), ad::gather_rows(t, to))), 1));
            Tensor u_distance =
                ad::mul_scalar(ad::sum_all(ad::square(ad::add_scalar(d, -d_hat))), 1.0 / d_hat);
            total = ad::add(total, ad::mul_scalar(u_distance, u_number));
        }
    }
    return ad::mul_scalar(total, 1.0 / static_cast<double>(cfg.p_values.size()));
}

double uniform_statistic(std::span<const Vec3> points, double p, int m_seeds, int start_index) {
    const int n = static_cast<int>(points.size());
    const double r_d = std::sqrt(p);
    const double n_hat = expected_count(n, p);
    UniformRegions regions = build_uniform_regions(points, r_d, m_seeds, start_index);

    double total = 0.0;
    std::vector<double> nn;
    for (const auto& members : regions.members) {
        nn.clear();
        for (std::size_t a = 0; a < members.size(); ++a) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < members.size(); ++b) {
                if (a == b) continue;
                best = std::min(best, dist2(points[members[a]], points[members[b]]));
            }
            if (members.size() > 1) nn.push_back(std::sqrt(best));
        }
        const int count = static_cast<int>(members.size());
        const double d_hat = count > 1 ? expected_spacing(count, r_d) : 1.0;
        total += uniform_region_contribution(count, nn, n_hat, d_hat);
    }
    return total;
}

Tensor self_projection_term(const Tensor& q, const SelfProjectionConfig& cfg) {
    check_points("self_projection_term", q);
    const int n = static_cast<int>(q.dim(0));
    if (cfg.k < 2 || cfg.k >= n)
        throw std::invalid_argument("self_projection_term: k must satisfy 2 <= k < point count");
    NeighborGraph g = geom::knn_rows(q.data(), n, 3, cfg.k);
    return self_projection_term(q, g.indices, cfg.k);
}

Tensor self_projection_term(const Tensor& q, std::span<const int> neighbors, int k) {
    check_points("self_projection_term", q);
    const std::int64_t n = q.dim(0);
    if (static_cast<std::int64_t>(neighbors.size()) != n * k)
        throw std::invalid_argument("self_projection_term: neighbor table size mismatch");

    std::vector<std::int64_t> nbr_idx(neighbors.begin(), neighbors.end());
    std::vector<std::int64_t> center_idx(neighbors.size());
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) center_idx[i * k + j] = i;

    Tensor nbrs = ad::gather_rows(q, std::move(nbr_idx));       // [n*k, 3]
    Tensor centers = ad::gather_rows(q, std::move(center_idx)); // [n*k, 3]
    Tensor centroids =
        ad::repeat_rows(ad::reduce_mean(ad::reshape(nbrs, {n, k, 3}), 1), k);  // [n*k, 3]

    Tensor dq2 = ad::reduce_sum(ad::square(ad::sub(centers, nbrs)), 1);
    Tensor dc2 = ad::reduce_sum(ad::square(ad::sub(centroids, nbrs)), 1);
    Tensor contrib = ad::mul(ad::abs(ad::sub(dq2, dc2)), ad::reciprocal(ad::add_scalar(dq2, 1.0)));
    return ad::mul_scalar(ad::sum_all(contrib), 1.0 / static_cast<double>(n * k));
}

JointLossParts joint_loss(const Tensor& s, std::span<const Tensor> q_list, const Tensor& t,
                          const LossWeights& weights, const UniformConfig& uniform_cfg,
                          const SelfProjectionConfig& sp_cfg, std::uint64_t draw_key) {
    if (q_list.empty()) throw std::invalid_argument("joint_loss: no fine patches");
    if (weights.alpha == 0.0 && weights.beta == 0.0 && weights.gamma == 0.0)
        throw std::invalid_argument("joint_loss: all weights are zero");
    const double inv_r = 1.0 / static_cast<double>(q_list.size());

    JointLossParts parts;
    parts.total = Tensor::scalar(0.0);
    if (weights.alpha != 0.0) {
        Tensor rec = Tensor::scalar(0.0);
        for (const Tensor& q : q_list) rec = ad::add(rec, chamfer(s, q));
        rec = ad::mul_scalar(rec, inv_r);
        parts.rec = rec.item();
        parts.total = ad::add(parts.total, ad::mul_scalar(rec, weights.alpha));
    }
    if (weights.beta != 0.0) {
        Tensor uni = uniform_term(t, uniform_cfg, draw_key);
        parts.uni = uni.item();
        parts.total = ad::add(parts.total, ad::mul_scalar(uni, weights.beta));
    }
    if (weights.gamma != 0.0) {
        Tensor sp = Tensor::scalar(0.0);
        for (const Tensor& q : q_list) sp = ad::add(sp, self_projection_term(q, sp_cfg));
        sp = ad::mul_scalar(sp, inv_r);
        parts.sp = sp.item();
        parts.total = ad::add(parts.total, ad::mul_scalar(sp, weights.gamma));
    }
    return parts;
}

}  // namespace pcu::loss
