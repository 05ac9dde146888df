#include "pcu/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcu/errors.hpp"
#include "pcu/geometry.hpp"
#include "pcu/rng.hpp"

namespace pcu::train {

using ad::Tensor;

void TrainConfig::validate() const {
    net.validate();
    if (patch_size < net.rate || patch_size % net.rate != 0)
        throw std::invalid_argument("TrainConfig: rate must divide patch_size");
    if (patch_size / net.rate <= net.gcn_k)
        throw std::invalid_argument("TrainConfig: coarse patches need more points than gcn_k");
    if (patches_per_model < 1 || batch_size < 1 || epochs < 1)
        throw std::invalid_argument("TrainConfig: counts must be positive");
    if (!(lr0 > lr_floor && lr_floor > 0.0))
        throw std::invalid_argument("TrainConfig: need lr0 > lr_floor > 0");
    if (!(decay_rate > 0.0 && decay_rate < 1.0))
        throw std::invalid_argument("TrainConfig: decay_rate must lie in (0,1)");
    if (decay_every < 1) throw std::invalid_argument("TrainConfig: decay_every must be >= 1");
    if (graph_k < 1) throw std::invalid_argument("TrainConfig: graph_k must be >= 1");
    if (infer_coverage <= 0.0)
        throw std::invalid_argument("TrainConfig: infer_coverage must be positive");
    if (uniform.m_seeds < 1) throw std::invalid_argument("TrainConfig: uniform seeds must be >= 1");
    if (sp.k < 2 || sp.k >= patch_size)
        throw std::invalid_argument("TrainConfig: sp.k must satisfy 2 <= k < patch_size");
    if (weights.alpha == 0.0 && weights.beta == 0.0 && weights.gamma == 0.0)
        throw std::invalid_argument("TrainConfig: all loss weights are zero");
}

TrainConfig full_scale_config() {
    TrainConfig cfg;
    cfg.patch_size = 256;
    cfg.patches_per_model = 24;
    cfg.batch_size = 24;
    cfg.epochs = 200;
    cfg.lr0 = 1e-4;
    cfg.decay_rate = 0.7;
    cfg.decay_every = 50000;
    cfg.lr_floor = 1e-6;
    cfg.weights = loss::LossWeights{};  // 100 / 10 / 0.01
    cfg.net = net::full_scale_network_config();
    cfg.uniform.m_seeds = 50;
    cfg.sp.k = 8;
    return cfg;
}

double lr_schedule(const TrainConfig& cfg, std::int64_t step) {
    if (step < 0) throw std::invalid_argument("lr_schedule: negative step");
    double decayed = cfg.lr0 * std::pow(cfg.decay_rate,
                                        static_cast<double>(step / cfg.decay_every));
    return std::max(cfg.lr_floor, decayed);
}

void adam_step(ad::ParamStore& params, double lr, std::int64_t t) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (auto& p : params.params()) {
        const auto& grad = p->value.grad();
        if (grad.empty()) continue;  // parameter unreachable from this loss
        auto& theta = p->value.raw_data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double g = grad[i];
            if (!std::isfinite(g))
                throw NumericError("adam_step: non-finite gradient in parameter " + p->name);
            p->adam_m[i] = kBeta1 * p->adam_m[i] + (1.0 - kBeta1) * g;
            p->adam_v[i] = kBeta2 * p->adam_v[i] + (1.0 - kBeta2) * g * g;
            const double m_hat = p->adam_m[i] / bc1;
            const double v_hat = p->adam_v[i] / bc2;
            theta[i] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
        }
    }
    params.zero_grad();
}

std::vector<TrainItem> build_dataset(std::span<const PointCloud> models, const TrainConfig& cfg) {
    std::vector<TrainItem> items;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        auto patches = geom::geodesic_patches(models[mi], cfg.patches_per_model, cfg.patch_size,
                                              cfg.graph_k);
        for (std::size_t pi = 0; pi < patches.size(); ++pi) {
            TrainItem item;
            item.patch = std::move(patches[pi]);
            item.key = rng::key(cfg.seed, mi, pi);
            items.push_back(std::move(item));
        }
    }
    return items;
}

Trainer::Trainer(const TrainConfig& cfg) : cfg_(cfg), network_(cfg.net, cfg.seed) {
    cfg_.validate();
}

StepStats Trainer::train_step(std::span<const TrainItem> batch) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    const int r = cfg_.rate();

    Tensor batch_loss = Tensor::scalar(0.0);
    StepStats stats;
    for (const TrainItem& item : batch) {
        if (item.patch.size() != cfg_.patch_size)
            throw std::invalid_argument("train_step: patch size does not match the config");
        Tensor s = net::points_to_tensor(item.patch.points);
        auto coarse = geom::downsample_coarse(item.patch, r, item.key);
        std::vector<Tensor> fine;
        fine.reserve(r);
        for (const Patch& c : coarse)
            fine.push_back(network_.coarse_to_fine(net::points_to_tensor(c.points)));
        Tensor t = ad::concat(fine, 0);
        auto parts = loss::joint_loss(s, fine, t, cfg_.weights, cfg_.uniform, cfg_.sp,
                                      rng::key(cfg_.seed, rng::kTagUniform, step_, item.key));
        batch_loss = ad::add(batch_loss, parts.total);
        stats.rec += parts.rec;
        stats.uni += parts.uni;
        stats.sp += parts.sp;
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    batch_loss = ad::mul_scalar(batch_loss, inv_b);
    stats.rec *= inv_b;
    stats.uni *= inv_b;
    stats.sp *= inv_b;
    stats.loss = batch_loss.item();
    stats.step = step_;
    stats.lr = lr_schedule(cfg_, step_);
    if (!std::isfinite(stats.loss))
        throw NumericError("train_step: non-finite loss at step " + std::to_string(step_));

    network_.params().zero_grad();
    ad::backward(batch_loss);
    adam_step(network_.params(), stats.lr, step_ + 1);
    ++step_;
    return stats;
}

void Trainer::fit(std::span<const TrainItem> dataset,
                  const std::function<void(const StepStats&)>& on_step) {
    if (dataset.empty()) throw std::invalid_argument("fit: empty dataset");
    const std::int64_t n = static_cast<std::int64_t>(dataset.size());
    const std::int64_t spe = (n + cfg_.batch_size - 1) / cfg_.batch_size;  // steps per epoch
    const std::int64_t total = spe * cfg_.epochs;

    std::vector<std::int64_t> order(n);
    while (step_ < total) {
        const std::int64_t epoch = step_ / spe;
        // Deterministic per-epoch shuffle (Fisher-Yates).
        for (std::int64_t i = 0; i < n; ++i) order[i] = i;
        rng::Stream stream(rng::key(cfg_.seed, rng::kTagShuffle, epoch));
        for (std::int64_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[stream.next_index(static_cast<int>(i + 1))]);

        for (std::int64_t b = step_ % spe; b < spe && step_ < total; ++b) {
            std::vector<TrainItem> batch;
            for (std::int64_t i = b * cfg_.batch_size;
                 i < std::min(n, (b + 1) * cfg_.batch_size); ++i)
                batch.push_back(dataset[order[i]]);
            StepStats stats = train_step(batch);
            if (on_step) on_step(stats);
        }
    }
}

PointCloud upsample_cloud(const PointCloud& cloud, const net::Network& network,
                          const TrainConfig& cfg) {
    const int n = cloud.size();
    if (n < cfg.patch_size)
        throw std::invalid_argument("upsample_cloud: cloud has fewer points than one patch");
    const int r = cfg.rate();
    const int n_patches = std::max(
        1, static_cast<int>(std::ceil(cfg.infer_coverage * n / cfg.patch_size)));

    auto patches = geom::geodesic_patches(cloud, n_patches, cfg.patch_size, cfg.graph_k);

    ad::NoGradGuard guard;
    std::vector<Vec3> pool;
    pool.reserve(static_cast<std::size_t>(n_patches) * cfg.patch_size * r);
    for (std::size_t pi = 0; pi < patches.size(); ++pi) {
        auto coarse = geom::downsample_coarse(patches[pi], r,
                                              rng::key(cfg.seed, rng::kTagMerge, pi));
        for (const Patch& c : coarse) {
            Tensor fine = network.coarse_to_fine(net::points_to_tensor(c.points));
            Patch out;
            out.points = net::tensor_to_points(fine);
            out.center = patches[pi].center;
            out.scale = patches[pi].scale;
            for (const Vec3& p : geom::denormalize(out)) pool.push_back(p);
        }
    }

    const int target = r * n;
    if (static_cast<int>(pool.size()) < target)
        throw std::invalid_argument("upsample_cloud: merged patches yield too few points; "
                                    "raise infer_coverage");
    rng::Stream stream(rng::key(cfg.seed, rng::kTagMerge, 0xFF5u));
    auto picks = geom::fps(pool, target, stream.next_index(static_cast<int>(pool.size())));
    PointCloud out;
    out.points.reserve(target);
    for (int i : picks) out.points.push_back(pool[i]);
    return out;
}

}  // namespace pcu::train
