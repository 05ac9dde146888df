#include "pcu/autodiff.hpp"

#include <cmath>
#include <stdexcept>

#include "pcu/errors.hpp"
#include "pcu/rng.hpp"

namespace pcu::ad {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

Parameter& ParamStore::emplace(const std::string& name, Shape shape, std::vector<double> data) {
    if (by_name_.contains(name))
        throw std::invalid_argument("ParamStore: duplicate parameter name " + name);
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->value = Tensor::from_data(std::move(shape), std::move(data));
    p->value.set_requires_grad(true);
    p->adam_m.assign(p->value.data().size(), 0.0);
    p->adam_v.assign(p->value.data().size(), 0.0);
    Parameter& ref = *p;
    by_name_[name] = p.get();
    params_.push_back(std::move(p));
    return ref;
}

Parameter& ParamStore::create_glorot(const std::string& name, std::int64_t fan_in,
                                     std::int64_t fan_out) {
    double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    rng::Stream stream(rng::key(seed_, rng::kTagInit, fnv1a(name)));
    std::vector<double> data(static_cast<std::size_t>(fan_in * fan_out));
    for (double& x : data) x = (2.0 * stream.next_uniform() - 1.0) * a;
    return emplace(name, {fan_in, fan_out}, std::move(data));
}

Parameter& ParamStore::create_zeros(const std::string& name, Shape shape) {
    std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)), 0.0);
    return emplace(name, std::move(shape), std::move(data));
}

Parameter& ParamStore::create_normal(const std::string& name, Shape shape) {
    rng::Stream stream(rng::key(seed_, rng::kTagGrid, fnv1a(name)));
    std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)));
    for (double& x : data) x = stream.next_normal();
    return emplace(name, std::move(shape), std::move(data));
}

Parameter& ParamStore::create_from(const std::string& name, Shape shape,
                                   std::vector<double> data) {
    return emplace(name, std::move(shape), std::move(data));
}

Parameter* ParamStore::find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParamStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

Parameter& ParamStore::at(const std::string& name) {
    Parameter* p = find(name);
    if (!p) throw std::invalid_argument("ParamStore: no parameter named " + name);
    return *p;
}

std::int64_t ParamStore::slot_count() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += p->numel();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& p : params_) p->value.zero_grad();
}

void ParamStore::fill_all(double value) {
    for (auto& p : params_)
        for (double& x : p->value.raw_data()) x = value;
}

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Parameter*> params,
                           double eps) {
    if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");

    double v0, v1;
    {
        NoGradGuard guard;
        v0 = f().item();
        v1 = f().item();
    }
    if (v0 != v1) throw DeterminismError("grad_check: two forward passes differ");

    for (Parameter* p : params) p->value.zero_grad();
    Tensor root = f();
    backward(root);

    GradCheckReport report;
    for (Parameter* p : params) {
        const std::vector<double> analytic = p->value.grad();
        std::vector<double>& theta = p->value.raw_data();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            double plus, minus;
            {
                NoGradGuard guard;
                theta[i] = saved + eps;
                plus = f().item();
                theta[i] = saved - eps;
                minus = f().item();
            }
            theta[i] = saved;
            const double numeric = (plus - minus) / (2.0 * eps);
            const double a = analytic[i];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name;
                report.worst_slot = static_cast<std::int64_t>(i);
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

GradCheckReport grad_check(const std::function<Tensor()>& f, ParamStore& store, double eps) {
    std::vector<Parameter*> params;
    params.reserve(store.size());
    for (auto& p : store.params()) params.push_back(p.get());
    return grad_check(f, std::move(params), eps);
}

}  // namespace pcu::ad
