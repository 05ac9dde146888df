#include "pcu/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pcu/geometry.hpp"

namespace pcu::net {

using ad::Tensor;

int NetworkConfig::sqrt_rate() const {
    int u = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rate))));
    return u;
}

void NetworkConfig::validate() const {
    int u = sqrt_rate();
    if (rate < 4 || u * u != rate)
        throw std::invalid_argument("NetworkConfig: rate must be a perfect square >= 4");
    if (gcn_k < 2) throw std::invalid_argument("NetworkConfig: gcn_k must be >= 2");
    if (level_channels < 1 || agg_channels < 1 || expand_channels < 1 || head_hidden < 1)
        throw std::invalid_argument("NetworkConfig: channel widths must be positive");
    if (levels != 3) throw std::invalid_argument("NetworkConfig: levels is fixed at 3");
}

NetworkConfig full_scale_network_config() {
    NetworkConfig c;
    c.gcn_k = 10;
    c.level_channels = 64;
    c.agg_channels = 480;
    c.expand_channels = 128;
    c.rate = 4;
    return c;
}

NeighborGraph feature_knn(const Tensor& features, int k) {
    const int m = static_cast<int>(features.dim(0));
    const int dim = static_cast<int>(features.dim(1));
    return geom::knn_rows(features.data(), m, dim, k);
}

FeatureMap edge_conv(const FeatureMap& fmap, const EdgeConvWeights& weights) {
    const Tensor& f = fmap.features;
    const std::int64_t m = f.dim(0);
    const int k = fmap.neighborhood.k;
    if (k >= m)
        throw std::invalid_argument("edge_conv: neighbor count must be below the point count");

    std::vector<std::int64_t> nbr_idx(static_cast<std::size_t>(m) * k);
    std::vector<std::int64_t> center_idx(nbr_idx.size());
    for (std::int64_t i = 0; i < m; ++i) {
        auto nbrs = fmap.neighborhood.neighbors(static_cast<int>(i));
        for (int j = 0; j < k; ++j) {
            nbr_idx[i * k + j] = nbrs[j];
            center_idx[i * k + j] = i;
        }
    }

    Tensor edges = ad::sub(ad::gather_rows(f, std::move(nbr_idx)),
                           ad::gather_rows(f, std::move(center_idx)));
    Tensor h = ad::relu(ad::add(ad::matmul(edges, weights.w), weights.b));
    const std::int64_t d = weights.w.dim(1);
    Tensor out = ad::reduce_max(ad::reshape(h, {m, k, d}), 1);

    FeatureMap next;
    next.level = fmap.level + 1;
    next.features = out;
    next.neighborhood = feature_knn(out, k);
    return next;
}

Tensor self_attention(const Tensor& features, const AttentionWeights& weights) {
    Tensor x = ad::add(ad::matmul(features, weights.wx), weights.bx);
    Tensor y = ad::add(ad::matmul(features, weights.wy), weights.by);
    Tensor h = ad::add(ad::matmul(features, weights.wh), weights.bh);
    Tensor attn = ad::softmax(ad::matmul(y, ad::transpose(x)), 1);
    return ad::add(features, ad::matmul(attn, h));
}

std::vector<double> fixed_grid_codes(int u, double span) {
    std::vector<double> codes(static_cast<std::size_t>(u) * 2);
    for (int i = 0; i < u; ++i) {
        double t = u == 1 ? 0.0 : -span + 2.0 * span * i / (u - 1);
        codes[2 * i] = t;
        codes[2 * i + 1] = t;
    }
    return codes;
}

Network::Linear Network::make_linear(const std::string& name, std::int64_t in, std::int64_t out) {
    Linear l;
    l.w = params_.create_glorot(name + ".w", in, out).value;
    l.b = params_.create_zeros(name + ".b", {out}).value;
    return l;
}

AttentionWeights Network::make_attention(const std::string& name, std::int64_t width) {
    const std::int64_t embed = std::max<std::int64_t>(4, width / 4);
    AttentionWeights a;
    a.wx = params_.create_glorot(name + ".x.w", width, embed).value;
    a.bx = params_.create_zeros(name + ".x.b", {embed}).value;
    a.wy = params_.create_glorot(name + ".y.w", width, embed).value;
    a.by = params_.create_zeros(name + ".y.b", {embed}).value;
    a.wh = params_.create_glorot(name + ".h.w", width, width).value;
    a.bh = params_.create_zeros(name + ".h.b", {width}).value;
    return a;
}

Tensor Network::apply(const Linear& l, const Tensor& x) const {
    return ad::add(ad::matmul(x, l.w), l.b);
}

Network::Network(const NetworkConfig& config, std::uint64_t seed)
    : config_(config), params_(seed) {
    const int d = config_.level_channels;
    const int c = config_.agg_channels;

    for (int l = 0; l < 3; ++l) {
        std::int64_t in = l == 0 ? 3 : d;
        gcn_[l].w = params_.create_glorot("extract.gcn" + std::to_string(l) + ".w", in, d).value;
        gcn_[l].b = params_.create_zeros("extract.gcn" + std::to_string(l) + ".b", {d}).value;
    }
    if (config_.use_self_attention) {
        for (int l = 0; l < 3; ++l)
            att_level_[l] = make_attention("extract.att" + std::to_string(l + 1), d);
    }
    agg1_ = make_linear("extract.agg1", 4ll * d, c);
    agg2_ = make_linear("extract.agg2", c, c);
    if (config_.use_self_attention) att_final_ = make_attention("extract.att_final", c);

    const int code_dims = config_.use_learnable_grid ? 4 : 2;
    auto make_block = [&](int index, int rate) {
        Block b;
        b.rate = rate;
        b.fixed_codes = Tensor::from_data({rate, 2}, fixed_grid_codes(rate, config_.fixed_grid_span));
        std::string name = "expand.block" + std::to_string(index);
        if (config_.use_learnable_grid)
            b.learnable_codes = params_.create_normal(name + ".code", {rate, 2}).value;
        b.mlp = make_linear(name, c + code_dims, c);
        return b;
    };
    if (config_.use_hierarchical_folding) {
        const int u = config_.sqrt_rate();
        blocks_.push_back(make_block(0, u));
        blocks_.push_back(make_block(1, u));
    } else {
        blocks_.push_back(make_block(0, config_.rate));
    }
    reduce_ = make_linear("expand.reduce", c, config_.expand_channels);
    head1_ = make_linear("head.fc1", config_.expand_channels, config_.head_hidden);
    head2_ = make_linear("head.fc2", config_.head_hidden, 3);
}

Tensor Network::extract_features(const Tensor& coarse) const {
    if (coarse.rank() != 2 || coarse.dim(1) != 3)
        throw std::invalid_argument("extract_features: input must be [M,3]");

    FeatureMap fmap;
    fmap.level = 0;
    fmap.features = coarse;
    fmap.neighborhood = feature_knn(coarse, config_.gcn_k);

    // Three edge-conv levels; attention output feeds only the aggregation,
    // the next level consumes the pre-attention features.
    Tensor f1_raw, hatted[3];
    for (int l = 0; l < 3; ++l) {
        fmap = edge_conv(fmap, gcn_[l]);
        if (l == 0) f1_raw = fmap.features;
        hatted[l] = config_.use_self_attention ? self_attention(fmap.features, att_level_[l])
                                               : fmap.features;
    }

    Tensor agg_in = ad::concat(std::vector<Tensor>{f1_raw, hatted[0], hatted[1], hatted[2]}, 1);
    Tensor agg = apply(agg2_, ad::relu(apply(agg1_, agg_in)));
    return config_.use_self_attention ? self_attention(agg, att_final_) : agg;
}

Tensor Network::run_block(const Block& block, const Tensor& x) const {
    const std::int64_t m = x.dim(0);
    const int u = block.rate;
    Tensor rep = ad::repeat_rows(x, u);

    std::vector<std::int64_t> pattern(static_cast<std::size_t>(m) * u);
    for (std::size_t i = 0; i < pattern.size(); ++i) pattern[i] = static_cast<std::int64_t>(i % u);

    std::vector<Tensor> parts{rep, ad::gather_rows(block.fixed_codes, pattern)};
    if (block.learnable_codes.defined())
        parts.push_back(ad::gather_rows(block.learnable_codes, pattern));
    Tensor cat = ad::concat(parts, 1);
    return ad::relu(apply(block.mlp, cat));
}

Tensor Network::expand_features(const Tensor& features) const {
    Tensor x = features;
    for (const Block& block : blocks_) x = run_block(block, x);
    return ad::relu(apply(reduce_, x));
}

Tensor Network::coarse_to_fine(const Tensor& coarse) const {
    Tensor features = extract_features(coarse);
    Tensor expanded = expand_features(features);
    Tensor hidden = ad::relu(apply(head1_, expanded));
    return apply(head2_, hidden);
}

Tensor points_to_tensor(std::span<const Vec3> points) {
    std::vector<double> data;
    data.reserve(points.size() * 3);
    for (const Vec3& p : points) {
        data.push_back(p.x);
        data.push_back(p.y);
        data.push_back(p.z);
    }
    return Tensor::from_data({static_cast<std::int64_t>(points.size()), 3}, std::move(data));
}

std::vector<Vec3> tensor_to_points(const Tensor& t) {
    if (t.rank() != 2 || t.dim(1) != 3)
        throw std::invalid_argument("tensor_to_points: tensor must be [N,3]");
    std::vector<Vec3> pts(static_cast<std::size_t>(t.dim(0)));
    const auto& d = t.data();
    for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = {d[3 * i], d[3 * i + 1], d[3 * i + 2]};
    return pts;
}

}  // namespace pcu::net
