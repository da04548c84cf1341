#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "sgs/layout.hpp"
#include "sgs/ops.hpp"
#include "sgs/tensor.hpp"

namespace sgs::test {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = true) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = dist(rng);
    return Tensor(shape, std::move(v), requires_grad);
}

inline SemanticLayout random_layout(std::size_t h, std::size_t w, std::mt19937_64& rng,
                                    std::size_t num_classes = kNumClasses) {
    std::uniform_int_distribution<int> dist(0, static_cast<int>(num_classes) - 1);
    std::vector<std::uint8_t> cls(h * w);
    for (auto& c : cls) c = static_cast<std::uint8_t>(dist(rng));
    return SemanticLayout(h, w, std::move(cls));
}

/// Reduces any tensor to a scalar with fixed random weights so every output
/// element reaches the gradient.
inline Tensor weighted_sum(const Tensor& out, std::uint64_t seed = 99) {
    std::mt19937_64 rng(seed);
    return sum(mul(out, random_tensor(out.shape(), rng, -1.0, 1.0, false)));
}

/// Largest norm-wise relative error between the analytic gradient of the
/// scalar `f(inputs)` and central differences, over all inputs.
inline double gradient_error(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                             std::vector<Tensor> inputs, double h = 1e-6) {
    for (auto& t : inputs) t.zero_grad();
    backward(f(inputs));
    double worst = 0.0;
    for (auto& t : inputs) {
        std::vector<double> analytic(t.numel(), 0.0);
        if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
        std::vector<double> numeric(t.numel());
        auto data = t.mutable_data();
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double saved = data[i];
            double up, down;
            {
                NoGradGuard guard;
                data[i] = saved + h;
                up = f(inputs).item();
                data[i] = saved - h;
                down = f(inputs).item();
            }
            data[i] = saved;
            numeric[i] = (up - down) / (2.0 * h);
        }
        double diff = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t i = 0; i < t.numel(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            na += analytic[i] * analytic[i];
            nn += numeric[i] * numeric[i];
        }
        const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
        worst = std::max(worst, std::sqrt(diff) / denom);
        t.zero_grad();
    }
    return worst;
}

}  // namespace sgs::test
