#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sgs/tensor.hpp"

namespace sgs {

/// Trainable weight plus its Adam moments.
struct Parameter {
    std::string name;
    Tensor value;
    std::vector<double> m1;
    std::vector<double> m2;
    std::int64_t step = 0;

    Parameter(std::string name, Tensor value);
};

struct AdamOptions {
    double lr = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update on every parameter, then clears its gradient.
/// Throws ShapeError if a parameter has no gradient; a parameter that no loss
/// reached must be filtered out by the caller.
void adam_step(const std::vector<Parameter*>& params, const AdamOptions& options);

/// Learning-rate multiplier: 1 for the first half of the epochs, then a linear
/// ramp towards zero over the second half (0-based epoch index).
double lr_factor(int epoch, int total_epochs);

/// Seeded N(0, std) tensor.
Tensor gaussian_init(const Shape& shape, double stddev, std::mt19937_64& rng);

}  // namespace sgs
