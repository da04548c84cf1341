#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sgs {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Propagates the gradient stored on the owning node into its parents.
using BackwardFn = std::function<void(std::span<const double> out_grad)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    BackwardFn backward;

    void accumulate(std::span<const double> g);
    std::vector<double>& grad_buffer();
};

/// Dense row-major float64 array that records the operations producing it.
///
/// Copies share the underlying node, so a Tensor behaves like a handle. Values
/// are treated as immutable once constructed; only gradients are written after
/// construction and only by backward().
class Tensor {
public:
    Tensor() = default;

    /// Leaf tensor. Rejects data whose length does not match the shape and any
    /// non-finite entry.
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    /// Output of a recorded operation. No finiteness check; the training loop
    /// screens losses for NaN instead.
    static Tensor from_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                          BackwardFn backward);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t dim(std::size_t axis) const;
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->data.size(); }

    std::span<const double> data() const { return node_->data; }
    double item() const;
    double at(std::size_t flat) const { return node_->data[flat]; }

    bool requires_grad() const { return node_->requires_grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const double> grad() const { return node_->grad; }
    void zero_grad();
    /// Only meaningful on leaves; used to freeze or unfreeze weights.
    void set_requires_grad(bool value);

    /// Same values, no history.
    Tensor detach() const;

    /// In-place value update for optimizer steps and checkpoint loading.
    std::span<double> mutable_data() { return node_->data; }

    const NodePtr& node() const { return node_; }

private:
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

/// Reverse sweep from a scalar root. Gradients add into every reachable node
/// that requires them.
void backward(const Tensor& root);

/// True while operations record history on this thread.
bool grad_enabled();

/// Disables recording for the lifetime of the guard.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace sgs
