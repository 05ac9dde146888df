#include "pcu/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "pcu/errors.hpp"

namespace pcu::ad {

using detail::Node;

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

namespace {

thread_local int g_no_grad_depth = 0;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                     shape_str(b));
}

std::shared_ptr<Node> new_node(const char* op, Shape shape, std::vector<double> data) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->shape = std::move(shape);
    n->data = std::move(data);
    if (n->numel() != shape_numel(n->shape))
        throw ShapeError(std::string(op) + ": data size does not match shape " +
                         shape_str(n->shape));
    return n;
}

// Attach graph edges and the backward closure when gradients are live.
Tensor finish(std::shared_ptr<Node> n, std::initializer_list<const Tensor*> parents,
              std::function<void()> backprop) {
    bool rg = false;
    if (grad_enabled())
        for (const Tensor* p : parents) rg = rg || p->requires_grad();
    if (rg) {
        n->requires_grad = true;
        for (const Tensor* p : parents) n->parents.push_back(p->shared_node());
        n->backprop = std::move(backprop);
    }
    return Tensor::wrap(std::move(n));
}

struct AxisSplit {
    std::int64_t outer, mid, inner;
};

AxisSplit split_axis(const char* op, const Shape& s, int axis) {
    if (axis < 0 || axis >= static_cast<int>(s.size()))
        throw ShapeError(std::string(op) + ": axis out of range for shape " + shape_str(s));
    AxisSplit r{1, s[axis], 1};
    for (int i = 0; i < axis; ++i) r.outer *= s[i];
    for (int i = axis + 1; i < static_cast<int>(s.size()); ++i) r.inner *= s[i];
    return r;
}

Shape drop_axis(const Shape& s, int axis) {
    Shape out;
    for (int i = 0; i < static_cast<int>(s.size()); ++i)
        if (i != axis) out.push_back(s[i]);
    return out;
}

bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    for (std::size_t i = 0; i < small.size(); ++i)
        if (small[small.size() - 1 - i] != big[big.size() - 1 - i]) return false;
    return true;
}

// Elementwise binary op with trailing-suffix broadcasting.
template <class Fwd, class BwdBig, class BwdSmall>
Tensor broadcast_op(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, BwdBig bwd_big,
                    BwdSmall bwd_small) {
    const bool a_big = a.shape() == b.shape() ||
                       (b.numel() == 1 ? true
                                       : is_suffix(b.shape(), a.shape()) && b.numel() < a.numel());
    const bool b_big = !a_big && (a.numel() == 1 || is_suffix(a.shape(), b.shape()));
    if (!a_big && !b_big) shape_fail(name, a.shape(), b.shape());

    const Tensor& big = a_big ? a : b;
    const Tensor& small = a_big ? b : a;
    const std::int64_t n = big.numel(), m = small.numel();
    const bool small_is_b = a_big;

    std::vector<double> out(n);
    const auto& bd = big.data();
    const auto& sd = small.data();
    for (std::int64_t i = 0; i < n; ++i) {
        double x = small_is_b ? fwd(bd[i], sd[i % m]) : fwd(sd[i % m], bd[i]);
        out[i] = x;
    }

    auto node = new_node(name, big.shape(), std::move(out));
    Node* self = node.get();
    Node* pb = big.node();
    Node* ps = small.node();
    return finish(
        std::move(node), {&a, &b}, [self, pb, ps, n, m, small_is_b, bwd_big, bwd_small]() {
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    pb->grad[i] += bwd_big(self->grad[i], small_is_b);
            }
            if (ps->requires_grad) {
                ps->ensure_grad();
                for (std::int64_t i = 0; i < n; ++i)
                    ps->grad[i % m] += bwd_small(self->grad[i], small_is_b);
            }
        });
}

}  // namespace

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool grad_enabled() { return g_no_grad_depth == 0; }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
    std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)), value);
    return Tensor(new_node("leaf", std::move(shape), std::move(data)));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    return Tensor(new_node("leaf", std::move(shape), std::move(data)));
}

Tensor Tensor::scalar(double value) { return from_data({}, {value}); }

double Tensor::item() const {
    if (numel() != 1) throw std::invalid_argument("item: tensor is not a scalar");
    return node_->data[0];
}

Tensor Tensor::detach() const { return from_data(node_->shape, node_->data); }

// ---- matmul ----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        shape_fail("matmul", a.shape(), b.shape());
    const std::int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    const auto& ad = a.data();
    const auto& bd = b.data();
    std::vector<double> out(static_cast<std::size_t>(m * n), 0.0);
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t p = 0; p < k; ++p) {
            double aip = ad[i * k + p];
            if (aip == 0.0) continue;
            for (std::int64_t j = 0; j < n; ++j) out[i * n + j] += aip * bd[p * n + j];
        }

    auto node = new_node("matmul", {m, n}, std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    Node* pb = b.node();
    return finish(std::move(node), {&a, &b}, [self, pa, pb, m, k, n]() {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < n; ++j) {
                    double g = self->grad[i * n + j];
                    if (g == 0.0) continue;
                    for (std::int64_t p = 0; p < k; ++p)
                        pa->grad[i * k + p] += g * pb->data[p * n + j];
                }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t p = 0; p < k; ++p) {
                    double aip = pa->data[i * k + p];
                    if (aip == 0.0) continue;
                    for (std::int64_t j = 0; j < n; ++j)
                        pb->grad[p * n + j] += aip * self->grad[i * n + j];
                }
        }
    });
}

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return broadcast_op(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double g, bool) { return g; }, [](double g, bool) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return broadcast_op(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double g, bool small_is_b) { return small_is_b ? g : -g; },
        [](double g, bool small_is_b) { return small_is_b ? -g : g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const bool same = a.shape() == b.shape();
    // The generic broadcast closure needs both operands' values; handle the
    // common same-shape case and the broadcast case in one body.
    const Tensor *big = &a, *small = &b;
    if (!same) {
        if (b.numel() == 1 || (is_suffix(b.shape(), a.shape()) && b.numel() < a.numel())) {
        } else if (a.numel() == 1 || is_suffix(a.shape(), b.shape())) {
            big = &b;
            small = &a;
        } else {
            shape_fail("mul", a.shape(), b.shape());
        }
    }
    const std::int64_t n = big->numel(), m = small->numel();
    const auto& bd = big->data();
    const auto& sd = small->data();
    std::vector<double> out(n);
    for (std::int64_t i = 0; i < n; ++i) out[i] = bd[i] * sd[i % m];

    auto node = new_node("mul", big->shape(), std::move(out));
    Node* self = node.get();
    Node* pb = big->node();
    Node* ps = small->node();
    return finish(std::move(node), {&a, &b}, [self, pb, ps, n, m]() {
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i)
                pb->grad[i] += self->grad[i] * ps->data[i % m];
        }
        if (ps->requires_grad) {
            ps->ensure_grad();
            for (std::int64_t i = 0; i < n; ++i)
                ps->grad[i % m] += self->grad[i] * pb->data[i];
        }
    });
}

Tensor add_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.data());
    for (double& x : out) x += c;
    auto node = new_node("add_scalar", a.shape(), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa]() {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += self->grad[i];
    });
}

Tensor mul_scalar(const Tensor& a, double c) {
    std::vector<double> out(a.data());
    for (double& x : out) x *= c;
    auto node = new_node("mul_scalar", a.shape(), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, c]() {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += c * self->grad[i];
    });
}

// ---- concat / gather -------------------------------------------------------

Tensor concat(std::span<const Tensor> parts, int axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const Shape& s0 = parts[0].shape();
    const int rank = static_cast<int>(s0.size());
    if (axis < 0 || axis >= rank)
        throw ShapeError("concat: axis out of range for shape " + shape_str(s0));

    std::int64_t total_mid = 0;
    for (const Tensor& p : parts) {
        if (p.rank() != rank) shape_fail("concat", s0, p.shape());
        for (int d = 0; d < rank; ++d)
            if (d != axis && p.shape()[d] != s0[d]) shape_fail("concat", s0, p.shape());
        total_mid += p.dim(axis);
    }

    Shape out_shape = s0;
    out_shape[axis] = total_mid;
    auto [outer, mid, inner] = split_axis("concat", out_shape, axis);
    std::vector<double> out(static_cast<std::size_t>(outer * mid * inner));

    std::vector<std::int64_t> part_mid(parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) part_mid[p] = parts[p].dim(axis);

    std::int64_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const auto& src = parts[p].data();
        const std::int64_t pm = part_mid[p];
        for (std::int64_t o = 0; o < outer; ++o)
            std::copy(src.begin() + o * pm * inner, src.begin() + (o + 1) * pm * inner,
                      out.begin() + (o * mid + offset) * inner);
        offset += pm;
    }

    auto node = new_node("concat", std::move(out_shape), std::move(out));
    Node* self = node.get();
    std::vector<Node*> parent_nodes;
    for (const Tensor& p : parts) parent_nodes.push_back(p.node());

    bool rg = false;
    if (grad_enabled())
        for (const Tensor& p : parts) rg = rg || p.requires_grad();
    if (rg) {
        node->requires_grad = true;
        for (const Tensor& p : parts) node->parents.push_back(p.shared_node());
        node->backprop = [self, parent_nodes, part_mid, outer = outer, mid = mid, inner = inner]() {
            std::int64_t offset = 0;
            for (std::size_t p = 0; p < parent_nodes.size(); ++p) {
                Node* pn = parent_nodes[p];
                const std::int64_t pm = part_mid[p];
                if (pn->requires_grad) {
                    pn->ensure_grad();
                    for (std::int64_t o = 0; o < outer; ++o)
                        for (std::int64_t j = 0; j < pm * inner; ++j)
                            pn->grad[o * pm * inner + j] +=
                                self->grad[(o * mid + offset) * inner + j];
                }
                offset += pm;
            }
        };
    }
    return Tensor::wrap(std::move(node));
}

Tensor gather_rows(const Tensor& a, std::vector<std::int64_t> indices) {
    if (a.rank() < 1) throw ShapeError("gather_rows: input must have rank >= 1");
    const std::int64_t rows = a.dim(0);
    const std::int64_t row_size = a.numel() / rows;
    for (auto i : indices)
        if (i < 0 || i >= rows)
            throw std::invalid_argument("gather_rows: index out of range");

    Shape out_shape = a.shape();
    out_shape[0] = static_cast<std::int64_t>(indices.size());
    std::vector<double> out(indices.size() * row_size);
    const auto& src = a.data();
    for (std::size_t i = 0; i < indices.size(); ++i)
        std::copy(src.begin() + indices[i] * row_size, src.begin() + (indices[i] + 1) * row_size,
                  out.begin() + static_cast<std::int64_t>(i) * row_size);

    auto node = new_node("gather_rows", std::move(out_shape), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, idx = std::move(indices), row_size]() {
        pa->ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::int64_t j = 0; j < row_size; ++j)
                pa->grad[idx[i] * row_size + j] +=
                    self->grad[static_cast<std::int64_t>(i) * row_size + j];
    });
}

Tensor repeat_rows(const Tensor& a, std::int64_t times) {
    if (times < 1) throw std::invalid_argument("repeat_rows: times must be >= 1");
    std::vector<std::int64_t> idx(static_cast<std::size_t>(a.dim(0) * times));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i) / times;
    return gather_rows(a, std::move(idx));
}

// ---- reductions ------------------------------------------------------------

Tensor reduce_max(const Tensor& a, int axis) {
    auto [outer, mid, inner] = split_axis("reduce_max", a.shape(), axis);
    const auto& src = a.data();
    std::vector<double> out(static_cast<std::size_t>(outer * inner));
    std::vector<std::int64_t> argmax(out.size());
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t i = 0; i < inner; ++i) {
            std::int64_t best = 0;
            double best_v = src[(o * mid) * inner + i];
            for (std::int64_t m = 1; m < mid; ++m) {
                double v = src[(o * mid + m) * inner + i];
                if (v > best_v) {  // strict > keeps the lowest index on ties
                    best_v = v;
                    best = m;
                }
            }
            out[o * inner + i] = best_v;
            argmax[o * inner + i] = best;
        }

    auto node = new_node("reduce_max", drop_axis(a.shape(), axis), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a},
                  [self, pa, argmax = std::move(argmax), outer = outer, mid = mid, inner = inner]() {
                      pa->ensure_grad();
                      for (std::int64_t o = 0; o < outer; ++o)
                          for (std::int64_t i = 0; i < inner; ++i) {
                              std::int64_t m = argmax[o * inner + i];
                              pa->grad[(o * mid + m) * inner + i] += self->grad[o * inner + i];
                          }
                  });
}

namespace {

Tensor reduce_linear(const char* name, const Tensor& a, int axis, double scale) {
    auto [outer, mid, inner] = split_axis(name, a.shape(), axis);
    const auto& src = a.data();
    std::vector<double> out(static_cast<std::size_t>(outer * inner), 0.0);
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t m = 0; m < mid; ++m)
            for (std::int64_t i = 0; i < inner; ++i)
                out[o * inner + i] += src[(o * mid + m) * inner + i];
    if (scale != 1.0)
        for (double& x : out) x *= scale;

    auto node = new_node(name, drop_axis(a.shape(), axis), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, outer = outer, mid = mid, inner = inner, scale]() {
        pa->ensure_grad();
        for (std::int64_t o = 0; o < outer; ++o)
            for (std::int64_t m = 0; m < mid; ++m)
                for (std::int64_t i = 0; i < inner; ++i)
                    pa->grad[(o * mid + m) * inner + i] += scale * self->grad[o * inner + i];
    });
}

}  // namespace

Tensor reduce_sum(const Tensor& a, int axis) { return reduce_linear("reduce_sum", a, axis, 1.0); }

Tensor reduce_mean(const Tensor& a, int axis) {
    auto split = split_axis("reduce_mean", a.shape(), axis);
    return reduce_linear("reduce_mean", a, axis, 1.0 / static_cast<double>(split.mid));
}

Tensor sum_all(const Tensor& a) {
    if (a.rank() == 0) return add_scalar(a, 0.0);
    Tensor flat = reshape(a, {a.numel()});
    return reduce_sum(flat, 0);
}

Tensor mean_all(const Tensor& a) { return mul_scalar(sum_all(a), 1.0 / a.numel()); }

// ---- unary -----------------------------------------------------------------

namespace {

template <class Fwd, class Bwd>
Tensor pointwise(const char* name, const Tensor& a, Fwd fwd, Bwd bwd) {
    const auto& src = a.data();
    std::vector<double> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = fwd(src[i]);
    auto node = new_node(name, a.shape(), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, bwd]() {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->grad.size(); ++i)
            pa->grad[i] += bwd(self->grad[i], pa->data[i], self->data[i]);
    });
}

}  // namespace

Tensor relu(const Tensor& a) {
    return pointwise(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double g, double x, double) { return x > 0.0 ? g : 0.0; });
}

Tensor square(const Tensor& a) {
    return pointwise(
        "square", a, [](double x) { return x * x; },
        [](double g, double x, double) { return 2.0 * x * g; });
}

Tensor sqrt(const Tensor& a) {
    for (double x : a.data())
        if (x < 0.0) throw std::domain_error("sqrt: negative input");
    return pointwise(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [](double g, double, double y) { return y > 0.0 ? g / (2.0 * y) : 0.0; });
}

Tensor reciprocal(const Tensor& a) {
    return pointwise(
        "reciprocal", a, [](double x) { return 1.0 / x; },
        [](double g, double, double y) { return -g * y * y; });
}

Tensor abs(const Tensor& a) {
    return pointwise(
        "abs", a, [](double x) { return std::abs(x); },
        [](double g, double x, double) { return x > 0.0 ? g : x < 0.0 ? -g : 0.0; });
}

Tensor softmax(const Tensor& a, int axis) {
    auto [outer, mid, inner] = split_axis("softmax", a.shape(), axis);
    const auto& src = a.data();
    std::vector<double> out(src.size());
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t i = 0; i < inner; ++i) {
            double mx = src[(o * mid) * inner + i];
            for (std::int64_t m = 1; m < mid; ++m)
                mx = std::max(mx, src[(o * mid + m) * inner + i]);
            double sum = 0.0;
            for (std::int64_t m = 0; m < mid; ++m) {
                double e = std::exp(src[(o * mid + m) * inner + i] - mx);
                out[(o * mid + m) * inner + i] = e;
                sum += e;
            }
            for (std::int64_t m = 0; m < mid; ++m) out[(o * mid + m) * inner + i] /= sum;
        }

    auto node = new_node("softmax", a.shape(), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, outer = outer, mid = mid, inner = inner]() {
        pa->ensure_grad();
        for (std::int64_t o = 0; o < outer; ++o)
            for (std::int64_t i = 0; i < inner; ++i) {
                double dot = 0.0;
                for (std::int64_t m = 0; m < mid; ++m) {
                    std::int64_t at = (o * mid + m) * inner + i;
                    dot += self->grad[at] * self->data[at];
                }
                for (std::int64_t m = 0; m < mid; ++m) {
                    std::int64_t at = (o * mid + m) * inner + i;
                    pa->grad[at] += self->data[at] * (self->grad[at] - dot);
                }
            }
    });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: input must be 2-D, got " + shape_str(a.shape()));
    const std::int64_t m = a.dim(0), n = a.dim(1);
    const auto& src = a.data();
    std::vector<double> out(src.size());
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) out[j * m + i] = src[i * n + j];

    auto node = new_node("transpose", {n, m}, std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa, m, n]() {
        pa->ensure_grad();
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < n; ++j) pa->grad[i * n + j] += self->grad[j * m + i];
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) shape_fail("reshape", a.shape(), shape);
    auto node = new_node("reshape", std::move(shape), std::vector<double>(a.data()));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a}, [self, pa]() {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += self->grad[i];
    });
}

Tensor tile(const Tensor& a, int axis, std::int64_t times) {
    if (times < 1) throw std::invalid_argument("tile: times must be >= 1");
    auto [outer, mid, inner] = split_axis("tile", a.shape(), axis);
    Shape out_shape = a.shape();
    out_shape[axis] *= times;
    const auto& src = a.data();
    std::vector<double> out(static_cast<std::size_t>(outer * mid * times * inner));
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t t = 0; t < times; ++t)
            std::copy(src.begin() + o * mid * inner, src.begin() + (o + 1) * mid * inner,
                      out.begin() + (o * times + t) * mid * inner);

    auto node = new_node("tile", std::move(out_shape), std::move(out));
    Node* self = node.get();
    Node* pa = a.node();
    return finish(std::move(node), {&a},
                  [self, pa, outer = outer, mid = mid, inner = inner, times]() {
                      pa->ensure_grad();
                      for (std::int64_t o = 0; o < outer; ++o)
                          for (std::int64_t t = 0; t < times; ++t)
                              for (std::int64_t j = 0; j < mid * inner; ++j)
                                  pa->grad[o * mid * inner + j] +=
                                      self->grad[(o * times + t) * mid * inner + j];
                  });
}

// ---- backward --------------------------------------------------------------

void backward(const Tensor& root) {
    if (!root.defined() || root.numel() != 1)
        throw std::invalid_argument("backward: root must be a scalar");
    Node* r = root.node();
    if (!r->requires_grad) return;  // nothing trainable is reachable

    // Post-order DFS over the requires_grad subgraph; reversing it yields a
    // topological order with every consumer before its producers.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited{r};
    std::vector<std::pair<Node*, std::size_t>> stack{{r, 0}};
    while (!stack.empty()) {
        auto& top = stack.back();
        if (top.second < top.first->parents.size()) {
            Node* p = top.first->parents[top.second++].get();
            if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(top.first);
            stack.pop_back();
        }
    }

    r->ensure_grad();
    r->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

}  // namespace pcu::ad
