#pragma once

#include <cstdint>
#include <vector>

#include "pcu/autodiff.hpp"
#include "pcu/tensor.hpp"
#include "pcu/types.hpp"

namespace pcu::net {

// Architecture widths and component toggles. The toggles correspond to the
// ablation variants: no self-attention, no learnable grid, no hierarchical
// grid. Turning one off changes which parameters exist, so networks are
// constructed per configuration; name-keyed init keeps shared weights
// identical across variants built from the same seed.
struct NetworkConfig {
    int gcn_k = 6;            // neighbors per local region
    int level_channels = 16;  // per-level feature width
    int agg_channels = 64;    // aggregated feature width
    int expand_channels = 32; // post-expansion width
    int rate = 4;             // upsampling rate, perfect square
    int levels = 3;
    int head_hidden = 64;
    double fixed_grid_span = 0.2;
    bool use_self_attention = true;
    bool use_learnable_grid = true;
    bool use_hierarchical_folding = true;

    int sqrt_rate() const;
    void validate() const;  // throws std::invalid_argument
};

NetworkConfig full_scale_network_config();  // K=10, D=64, C=480, C'=128, r=4

struct FeatureMap {
    int level = 0;
    ad::Tensor features;         // M x C_d
    NeighborGraph neighborhood;  // rebuilt in feature space at this level
};

struct EdgeConvWeights {
    ad::Tensor w;  // [C_in, D]
    ad::Tensor b;  // [D]
};

struct AttentionWeights {
    ad::Tensor wx, bx;  // query/key embeddings, width max(4, C_d/4)
    ad::Tensor wy, by;
    ad::Tensor wh, bh;  // value embedding, width C_d
};

// Neighbor rebuild in the current feature space; selection is detached from
// the graph (indices are constants of the forward pass).
NeighborGraph feature_knn(const ad::Tensor& features, int k);

// Edge convolution: per point, max-pool over ReLU(MLP(f_j - f_i)) for the K
// neighbors, then rebuild the neighborhood in the output space.
FeatureMap edge_conv(const FeatureMap& fmap, const EdgeConvWeights& weights);

// Residual self-attention: F + softmax(Y X^T) H with row-wise softmax.
ad::Tensor self_attention(const ad::Tensor& features, const AttentionWeights& weights);

// Evenly spaced codes along the diagonal of [-span, span]^2; u codes for one
// upsampling block of rate u.
std::vector<double> fixed_grid_codes(int u, double span);

// The coarse-to-fine reconstruction network. Owns its parameters.
class Network {
public:
    Network(const NetworkConfig& config, std::uint64_t seed);

    const NetworkConfig& config() const { return config_; }
    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }

    // [M,3] normalized coarse coordinates -> [M,C] aggregated features.
    ad::Tensor extract_features(const ad::Tensor& coarse) const;

    // [M,C] features -> [r*M, C'] expanded features.
    ad::Tensor expand_features(const ad::Tensor& features) const;

    // [M,3] -> [r*M, 3] reconstructed points in the normalized frame.
    ad::Tensor coarse_to_fine(const ad::Tensor& coarse) const;

private:
    struct Linear {
        ad::Tensor w, b;
    };
    Linear make_linear(const std::string& name, std::int64_t in, std::int64_t out);
    AttentionWeights make_attention(const std::string& name, std::int64_t width);
    ad::Tensor apply(const Linear& l, const ad::Tensor& x) const;

    struct Block {
        int rate = 1;
        ad::Tensor fixed_codes;      // constant [u,2]
        ad::Tensor learnable_codes;  // parameter [u,2]; undefined when disabled
        Linear mlp;
    };
    ad::Tensor run_block(const Block& block, const ad::Tensor& x) const;

    NetworkConfig config_;
    ad::ParamStore params_;

    EdgeConvWeights gcn_[3];
    AttentionWeights att_level_[3];  // for F^1..F^3 when enabled
    Linear agg1_, agg2_;
    AttentionWeights att_final_;
    std::vector<Block> blocks_;
    Linear reduce_;
    Linear head1_, head2_;
};

ad::Tensor points_to_tensor(std::span<const Vec3> points);
std::vector<Vec3> tensor_to_points(const ad::Tensor& t);

}  // namespace pcu::net
