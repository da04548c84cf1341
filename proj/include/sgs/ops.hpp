#pragma once

#include <cstddef>
#include <vector>

#include "sgs/tensor.hpp"

namespace sgs {

// Elementwise. Binary ops require identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.2);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor square(const Tensor& a);

// Reductions. The axis forms drop the reduced axes from the shape; reducing
// every axis yields shape [1].
Tensor sum(const Tensor& a);
Tensor sum(const Tensor& a, const std::vector<std::size_t>& axes);
Tensor mean(const Tensor& a);
Tensor mean(const Tensor& a, const std::vector<std::size_t>& axes);

/// Euclidean norm of all entries. The gradient at the origin is taken as 0.
Tensor l2_norm(const Tensor& a);

/// Joins tensors along `axis`; all other dimensions must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

Tensor reshape(const Tensor& a, Shape shape);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// 2-D cross-correlation over NCHW input with zero padding. `bias` may be an
/// undefined Tensor.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              std::size_t padding);

/// Nearest-neighbour upsampling by an integer factor on both spatial axes.
Tensor upsample_nearest(const Tensor& input, std::size_t factor);

/// Non-overlapping k x k average pooling. Spatial sizes must be divisible by k.
Tensor avg_pool(const Tensor& input, std::size_t k);

/// Parameter-free normalization with statistics over each (n, c) slice.
Tensor normalize_instance(const Tensor& input, double epsilon = 1e-5);

/// Parameter-free normalization with statistics over (n, h, w) per channel.
Tensor normalize_batch(const Tensor& input, double epsilon = 1e-5);

/// Softmax along `axis`.
Tensor softmax(const Tensor& a, std::size_t axis);

/// Mean binary cross-entropy of probabilities `pred` against a constant target.
/// Predictions are clamped into [clamp, 1 - clamp].
Tensor binary_cross_entropy(const Tensor& pred, const Tensor& target, double clamp = 1e-12);

/// Mean of -log(sigmoid(x)) (label 1) or -log(1 - sigmoid(x)) (label 0).
Tensor sigmoid_cross_entropy(const Tensor& logits, bool label);

/// Cosine similarity of every row of `rows` [R, C] with `v` [C]. Rows whose norm
/// product falls below `eps` produce 0 with zero gradient.
Tensor row_cosine(const Tensor& rows, const Tensor& v, double eps = 1e-12);

/// Euclidean distance matrix between the rows of `rows` [R, C]. Coincident
/// rows get distance 0 and zero gradient.
Tensor pairwise_distance(const Tensor& rows);

}  // namespace sgs
