#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pcu/loss.hpp"
#include "pcu/network.hpp"
#include "pcu/types.hpp"

namespace pcu::train {

// Defaults are the desk-scale configuration: small enough for CPU gradient
// checks and CI. The uniform weight is rebalanced for the desk-scale
// statistic (fewer points and seeds than the full-scale setup).
struct TrainConfig {
    int patch_size = 64;        // N; the coarse patches hold N/rate points
    int patches_per_model = 24;
    int batch_size = 4;
    int epochs = 120;
    double lr0 = 5e-3;
    double decay_rate = 0.7;
    int decay_every = 500;
    double lr_floor = 1e-6;
    int graph_k = 5;            // geodesic graph connectivity
    double infer_coverage = 3.0;
    std::uint64_t seed = 1;
    loss::LossWeights weights{100.0, 0.05, 0.01};
    net::NetworkConfig net;
    loss::UniformConfig uniform;
    loss::SelfProjectionConfig sp;

    int rate() const { return net.rate; }
    void validate() const;  // throws std::invalid_argument
};

// The full-scale hyper-parameter set; training at this
// scale needs GPU-class hardware and is not the default.
TrainConfig full_scale_config();

double lr_schedule(const TrainConfig& cfg, std::int64_t step);

// One Adam update (beta1=0.9, beta2=0.999, eps=1e-8, bias correction) over
// every parameter; t is the 1-based step. Gradients are zeroed afterwards.
// A non-finite gradient aborts with a NumericError naming the parameter.
void adam_step(ad::ParamStore& params, double lr, std::int64_t t);

// A normalized training patch plus the stream key that seeds its coarse
// decompositions.
struct TrainItem {
    Patch patch;
    std::uint64_t key = 0;
};

struct StepStats {
    std::int64_t step = 0;
    double lr = 0.0;
    double loss = 0.0;
    double rec = 0.0;
    double uni = 0.0;
    double sp = 0.0;
};

// Patch datasets are a pure function of (models, config): geodesic patches
// per model, item keys derived from (seed, model index, patch index).
std::vector<TrainItem> build_dataset(std::span<const PointCloud> models, const TrainConfig& cfg);

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg);

    const TrainConfig& config() const { return cfg_; }
    net::Network& network() { return network_; }
    const net::Network& network() const { return network_; }
    std::int64_t step() const { return step_; }

    // The self-supervised step: per patch, downsample into r coarse patches,
    // reconstruct each, aggregate, apply the joint loss; then one Adam update
    // on the batch-mean loss.
    StepStats train_step(std::span<const TrainItem> batch);

    // Runs the epoch loop from the current step (dataset order reshuffled per
    // epoch from the seed). Resuming from a checkpoint continues exactly
    // where the interrupted run was.
    void fit(std::span<const TrainItem> dataset,
             const std::function<void(const StepStats&)>& on_step = {});

    void save_checkpoint(const std::filesystem::path& path, const std::string& config_text) const;
    // Returns the config snapshot stored alongside the weights.
    std::string load_checkpoint(const std::filesystem::path& path);

private:
    TrainConfig cfg_;
    net::Network network_;
    std::int64_t step_ = 0;
};

// Reads the config snapshot out of a checkpoint without touching weights.
std::string checkpoint_config_text(const std::filesystem::path& path);

// Whole-cloud inference: geodesic patches, per-patch coarse-to-fine passes,
// denormalize and merge, then FPS down to exactly rate * |cloud| points.
PointCloud upsample_cloud(const PointCloud& cloud, const net::Network& network,
                          const TrainConfig& cfg);

}  // namespace pcu::train
