#include "sgs/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "sgs/error.hpp"

namespace sgs {

namespace {
thread_local bool t_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

std::vector<double>& Node::grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), 0.0);
    return grad;
}

void Node::accumulate(std::span<const double> g) {
    if (!requires_grad) return;
    auto& buf = grad_buffer();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
    }
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    for (double v : data) {
        if (!std::isfinite(v)) throw ShapeError("tensor data contains a non-finite value");
    }
    node_ = std::make_shared<Node>();
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{1}, {value}, requires_grad);
}

Tensor Tensor::from_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                       BackwardFn backward) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    bool needs = false;
    if (t_grad_enabled) {
        for (const auto& p : parents) needs = needs || p.requires_grad();
    }
    if (needs) {
        node->requires_grad = true;
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.node_);
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(shape()));
    }
    return node_->shape[axis];
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() requires a single-element tensor, got " + shape_str(shape()));
    return node_->data[0];
}

void Tensor::zero_grad() { node_->grad.clear(); }

void Tensor::set_requires_grad(bool value) {
    if (!node_->parents.empty()) throw ShapeError("set_requires_grad applies to leaf tensors only");
    node_->requires_grad = value;
    if (!value) node_->grad.clear();
}

Tensor Tensor::detach() const {
    auto node = std::make_shared<Node>();
    node->shape = node_->shape;
    node->data = node_->data;
    return Tensor(std::move(node));
}

void backward(const Tensor& root) {
    if (!root.defined() || root.numel() != 1) {
        throw ShapeError("backward requires a scalar root");
    }
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (inputs first).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (Node* n : order) {
        if (!n->parents.empty()) n->grad.clear();
    }
    root.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(n->grad);
    }
    // Interior gradients are scratch space; only leaves keep theirs.
    for (Node* n : order) {
        if (!n->parents.empty()) std::vector<double>().swap(n->grad);
    }
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

}  // namespace sgs
