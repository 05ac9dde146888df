#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcu::ad {

using Shape = std::vector<std::int64_t>;

std::string shape_str(const Shape& s);
std::int64_t shape_numel(const Shape& s);

namespace detail {

// One node of the computation graph. Data is immutable once the node has a
// consumer; leaves (parameters, inputs) may be rewritten between graphs.
struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until the first backward touches it
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void()> backprop;  // accumulates this->grad into parents' grads

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

// While a guard is alive, ops compute values only: no graph edges, no
// backward closures. Used for inference and metric evaluation.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

// Value-semantic handle to a graph node: a shaped row-major array of doubles
// with an optional gradient accumulator and backward record.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor from_data(Shape shape, std::vector<double> data);
    static Tensor scalar(double value);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    std::int64_t dim(int axis) const { return node_->shape[axis]; }
    std::int64_t numel() const { return node_->numel(); }

    const std::vector<double>& data() const { return node_->data; }
    // Leaf mutation for optimizers and test setup; never call on a node that
    // already has consumers in a live graph.
    std::vector<double>& raw_data() { return node_->data; }

    const std::vector<double>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool v) {
        node_->requires_grad = v;
        return *this;
    }

    // The single scalar value; throws unless numel() == 1.
    double item() const;

    // Value copy with no graph history.
    Tensor detach() const;

    detail::Node* node() const { return node_.get(); }
    const std::shared_ptr<detail::Node>& shared_node() const { return node_; }
    static Tensor wrap(std::shared_ptr<detail::Node> n) { return Tensor(std::move(n)); }

private:
    explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
    std::shared_ptr<detail::Node> node_;
};

// ---- primitive ops ---------------------------------------------------------

// 2-D matrix product [M,K] x [K,N] -> [M,N].
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise with broadcasting: shapes must match, or the smaller operand's
// shape must be a trailing suffix of the larger's (a scalar broadcasts to
// anything). Gradients reduce-sum over the broadcast axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);

Tensor concat(std::span<const Tensor> parts, int axis);

// Row gather: out[i] = a[indices[i]]; backward scatter-adds. Indices may
// repeat, which doubles as row duplication.
Tensor gather_rows(const Tensor& a, std::vector<std::int64_t> indices);

// Single-axis reductions; the axis disappears from the shape.
Tensor reduce_max(const Tensor& a, int axis);   // backward routes to the argmax (ties: lowest index)
Tensor reduce_sum(const Tensor& a, int axis);
Tensor reduce_mean(const Tensor& a, int axis);
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor softmax(const Tensor& a, int axis);  // max-subtracted for stability
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);        // derivative at 0 defined as 0
Tensor reciprocal(const Tensor& a);
Tensor abs(const Tensor& a);         // derivative at 0 defined as 0
Tensor transpose(const Tensor& a);   // 2-D
Tensor reshape(const Tensor& a, Shape shape);
Tensor tile(const Tensor& a, int axis, std::int64_t times);

// Sugar over gather_rows: each row repeated `times` times, groups contiguous.
Tensor repeat_rows(const Tensor& a, std::int64_t times);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double c) { return mul_scalar(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return mul_scalar(a, c); }

// Reverse-mode sweep from a scalar root: reverse-topological traversal that
// visits each reachable node exactly once and accumulates every trainable
// leaf's d(root)/d(leaf) into its grad buffer.
void backward(const Tensor& root);

}  // namespace pcu::ad
