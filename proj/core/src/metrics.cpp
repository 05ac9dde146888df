#include "pcu/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcu/bvh.hpp"
#include "pcu/geometry.hpp"
#include "pcu/kdtree.hpp"
#include "pcu/loss.hpp"
#include "pcu/rng.hpp"

namespace pcu::metrics {

namespace {

void check_nonempty(const char* op, std::span<const Vec3> pts) {
    if (pts.empty()) throw std::invalid_argument(std::string(op) + ": empty point set");
}

std::string shortest_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

double cd_metric(std::span<const Vec3> a, std::span<const Vec3> b) {
    check_nonempty("cd_metric", a);
    check_nonempty("cd_metric", b);
    KdTree3 tree_a(a), tree_b(b);
    double sum_ab = 0.0, sum_ba = 0.0;
    for (const Vec3& p : a) sum_ab += std::sqrt(tree_b.nearest_dist2(p));
    for (const Vec3& q : b) sum_ba += std::sqrt(tree_a.nearest_dist2(q));
    return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

double hd_metric(std::span<const Vec3> a, std::span<const Vec3> b) {
    check_nonempty("hd_metric", a);
    check_nonempty("hd_metric", b);
    KdTree3 tree_a(a), tree_b(b);
    double max_ab = 0.0, max_ba = 0.0;
    for (const Vec3& p : a) max_ab = std::max(max_ab, tree_b.nearest_dist2(p));
    for (const Vec3& q : b) max_ba = std::max(max_ba, tree_a.nearest_dist2(q));
    return std::sqrt(std::max(max_ab, max_ba));
}

P2fResult p2f(std::span<const Vec3> points, const TriangleMesh& mesh) {
    check_nonempty("p2f", points);
    if (mesh.face_count() == 0) throw std::invalid_argument("p2f: empty mesh");
    TriangleBvh bvh(mesh);
    P2fResult result;
    result.per_point.reserve(points.size());
    for (const Vec3& p : points) {
        double d = bvh.closest_dist(p);
        result.per_point.push_back(d);
        result.mean += d;
    }
    result.mean /= static_cast<double>(points.size());
    return result;
}

std::map<double, double> uniformity_metric(std::span<const Vec3> points,
                                           std::span<const double> p_values, int m_seeds) {
    check_nonempty("uniformity_metric", points);
    const int start = loss::geometric_start(points);
    std::map<double, double> scores;
    for (std::size_t pi = 0; pi < p_values.size(); ++pi)
        scores[p_values[pi]] = loss::uniform_statistic(points, p_values[pi], m_seeds, start);
    return scores;
}

MetricReport evaluate(std::span<const Vec3> pred, std::span<const Vec3> gt,
                      const TriangleMesh* mesh, std::span<const double> p_values, int m_seeds) {
    MetricReport report;
    report.pred_points = static_cast<int>(pred.size());
    report.gt_points = static_cast<int>(gt.size());
    report.cd = cd_metric(pred, gt);
    report.hd = hd_metric(pred, gt);
    if (mesh) report.p2f_mean = p2f(pred, *mesh).mean;

    // Uniformity is a statistic of the normalized shape.
    Patch shape;
    shape.points.assign(pred.begin(), pred.end());
    shape = geom::normalize(std::move(shape));
    report.uniformity = uniformity_metric(shape.points, p_values, m_seeds);
    return report;
}

std::string MetricReport::to_text() const {
    std::ostringstream os;
    os << "cd " << shortest_double(cd) << "\n";
    os << "hd " << shortest_double(hd) << "\n";
    if (has_p2f()) os << "p2f_mean " << shortest_double(p2f_mean) << "\n";
    for (const auto& [p, score] : uniformity)
        os << "uniformity_p" << shortest_double(p) << " " << shortest_double(score) << "\n";
    os << "pred_points " << pred_points << "\n";
    os << "gt_points " << gt_points << "\n";
    return os.str();
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["cd"] = cd;
    j["hd"] = hd;
    if (has_p2f()) j["p2f_mean"] = p2f_mean;
    nlohmann::json uni = nlohmann::json::object();
    for (const auto& [p, score] : uniformity) uni[shortest_double(p)] = score;
    j["uniformity"] = uni;
    j["pred_points"] = pred_points;
    j["gt_points"] = gt_points;
    return j.dump(2);
}

}  // namespace pcu::metrics
