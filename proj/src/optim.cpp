#include "sgs/optim.hpp"

#include <cmath>

#include "sgs/error.hpp"

namespace sgs {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)),
      value(std::move(value_)),
      m1(value.numel(), 0.0),
      m2(value.numel(), 0.0) {
    if (!value.requires_grad()) value = Tensor(value.shape(), {value.data().begin(), value.data().end()}, true);
}

void adam_step(const std::vector<Parameter*>& params, const AdamOptions& o) {
    for (const Parameter* p : params) {
        if (!p->value.has_grad()) throw ShapeError("adam_step: parameter '" + p->name + "' has no gradient");
    }
    for (Parameter* p : params) {
        ++p->step;
        const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(p->step));
        const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(p->step));
        auto g = p->value.grad();
        auto w = p->value.mutable_data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            p->m1[i] = o.beta1 * p->m1[i] + (1.0 - o.beta1) * g[i];
            p->m2[i] = o.beta2 * p->m2[i] + (1.0 - o.beta2) * g[i] * g[i];
            const double mhat = p->m1[i] / c1;
            const double vhat = p->m2[i] / c2;
            w[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
        }
        p->value.zero_grad();
    }
}

double lr_factor(int epoch, int total_epochs) {
    const int half = total_epochs / 2;
    if (epoch < half) return 1.0;
    return 1.0 - static_cast<double>(epoch - half + 1) / static_cast<double>(total_epochs - half + 1);
}

Tensor gaussian_init(const Shape& shape, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = dist(rng);
    return Tensor(shape, std::move(data), true);
}

}  // namespace sgs
