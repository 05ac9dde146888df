#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcu/tensor.hpp"

namespace pcu::ad {

// A named trainable tensor plus its Adam moment accumulators.
struct Parameter {
    std::string name;
    Tensor value;
    std::vector<double> adam_m;
    std::vector<double> adam_v;

    std::int64_t numel() const { return value.numel(); }
};

// Insertion-ordered registry of the model's trainable tensors. Names are
// unique path-style strings ("extract.gcn0.weight"); initialization is keyed
// by name so the same (seed, name) always produces the same values no matter
// the creation order.
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

    // Glorot-uniform weights: a = sqrt(6 / (fan_in + fan_out)).
    Parameter& create_glorot(const std::string& name, std::int64_t fan_in, std::int64_t fan_out);
    // Zeros (biases).
    Parameter& create_zeros(const std::string& name, Shape shape);
    // Standard normal entries.
    Parameter& create_normal(const std::string& name, Shape shape);
    Parameter& create_from(const std::string& name, Shape shape, std::vector<double> data);

    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    Parameter& at(const std::string& name);

    std::vector<std::unique_ptr<Parameter>>& params() { return params_; }
    const std::vector<std::unique_ptr<Parameter>>& params() const { return params_; }
    std::size_t size() const { return params_.size(); }
    std::int64_t slot_count() const;
    std::uint64_t seed() const { return seed_; }

    void zero_grad();
    void fill_all(double value);  // test hook: set every parameter slot

private:
    Parameter& emplace(const std::string& name, Shape shape, std::vector<double> data);

    std::uint64_t seed_;
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, Parameter*> by_name_;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::int64_t worst_slot = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of d(f)/d(theta) for every slot of every listed
// parameter. f must rebuild its graph on each call and be deterministic
// (verified with two forward passes; DeterminismError otherwise). Relative
// error uses the max(1, |analytic|, |numeric|) denominator.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Parameter*> params,
                           double eps = 1e-5);

GradCheckReport grad_check(const std::function<Tensor()>& f, ParamStore& store, double eps = 1e-5);

}  // namespace pcu::ad
