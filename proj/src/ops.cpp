#include "sgs/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "sgs/error.hpp"

namespace sgs {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
    if (a.rank() != rank) {
        throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
    }
}

// Unary elementwise op whose derivative is expressed through input x and output y.
template <typename Forward, typename Derivative>
Tensor unary(const Tensor& a, Forward f, Derivative df) {
    std::vector<double> out(a.numel());
    auto x = a.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
    auto node_a = a.node();
    auto result_data = std::make_shared<std::vector<double>>(out);
    return Tensor::from_op(a.shape(), std::move(out), {a},
                           [node_a, result_data, df](std::span<const double> g) {
                               std::vector<double> ga(g.size());
                               const auto& xv = node_a->data;
                               const auto& yv = *result_data;
                               for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * df(xv[i], yv[i]);
                               node_a->accumulate(ga);
                           });
}

// Maps every flat index of `shape` onto the flat index of the shape with `axes` removed.
std::vector<std::size_t> reduction_map(const Shape& shape, const std::vector<std::size_t>& axes,
                                       Shape& out_shape) {
    std::vector<bool> reduced(shape.size(), false);
    for (auto ax : axes) {
        if (ax >= shape.size()) {
            throw ShapeError("reduction axis " + std::to_string(ax) + " out of range for shape " +
                             shape_str(shape));
        }
        reduced[ax] = true;
    }
    out_shape.clear();
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (!reduced[i]) out_shape.push_back(shape[i]);
    }
    if (out_shape.empty()) out_shape.push_back(1);

    std::vector<std::size_t> out_stride(shape.size(), 0);
    std::size_t stride = 1;
    for (std::size_t i = shape.size(); i-- > 0;) {
        if (!reduced[i]) {
            out_stride[i] = stride;
            stride *= shape[i];
        }
    }
    std::size_t n = shape_numel(shape);
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        std::size_t o = 0;
        for (std::size_t d = 0; d < shape.size(); ++d) o += idx[d] * out_stride[d];
        map[flat] = o;
        for (std::size_t d = shape.size(); d-- > 0;) {
            if (++idx[d] < shape[d]) break;
            idx[d] = 0;
        }
    }
    return map;
}

void im2col(const double* img, std::size_t cin, std::size_t h, std::size_t w, std::size_t kh,
            std::size_t kw, std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo,
            double* cols) {
    const std::size_t p = ho * wo;
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t ki = 0; ki < kh; ++ki) {
            for (std::size_t kj = 0; kj < kw; ++kj) {
                double* row = cols + ((c * kh + ki) * kw + kj) * p;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    auto iy = static_cast<std::ptrdiff_t>(oy * stride + ki) - static_cast<std::ptrdiff_t>(pad);
                    double* dst = row + oy * wo;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) {
                        std::fill(dst, dst + wo, 0.0);
                        continue;
                    }
                    const double* src = img + (c * h + static_cast<std::size_t>(iy)) * w;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        auto ix = static_cast<std::ptrdiff_t>(ox * stride + kj) - static_cast<std::ptrdiff_t>(pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

void col2im(const double* cols, std::size_t cin, std::size_t h, std::size_t w, std::size_t kh,
            std::size_t kw, std::size_t stride, std::size_t pad, std::size_t ho, std::size_t wo,
            double* img) {
    const std::size_t p = ho * wo;
    for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t ki = 0; ki < kh; ++ki) {
            for (std::size_t kj = 0; kj < kw; ++kj) {
                const double* row = cols + ((c * kh + ki) * kw + kj) * p;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    auto iy = static_cast<std::ptrdiff_t>(oy * stride + ki) - static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    double* dst = img + (c * h + static_cast<std::size_t>(iy)) * w;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        auto ix = static_cast<std::ptrdiff_t>(ox * stride + kj) - static_cast<std::ptrdiff_t>(pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(w)) dst[ix] += row[oy * wo + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
    auto na = a.node(), nb = b.node();
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [na, nb](std::span<const double> g) {
        na->accumulate(g);
        nb->accumulate(g);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
    auto na = a.node(), nb = b.node();
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [na, nb](std::span<const double> g) {
        na->accumulate(g);
        if (nb->requires_grad) {
            std::vector<double> neg(g.begin(), g.end());
            for (auto& v : neg) v = -v;
            nb->accumulate(neg);
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
    auto na = a.node(), nb = b.node();
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [na, nb](std::span<const double> g) {
        std::vector<double> tmp(g.size());
        if (na->requires_grad) {
            for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * nb->data[i];
            na->accumulate(tmp);
        }
        if (nb->requires_grad) {
            for (std::size_t i = 0; i < g.size(); ++i) tmp[i] = g[i] * na->data[i];
            nb->accumulate(tmp);
        }
    });
}

Tensor scale(const Tensor& a, double factor) {
    return unary(a, [factor](double x) { return factor * x; },
                 [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double value) {
    return unary(a, [value](double x) { return x + value; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return unary(a, [slope](double x) { return x > 0.0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a,
                 [](double x) {
                     return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                 },
                 [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& a) {
    return unary(a, [](double x) { return std::abs(x); },
                 [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
    return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    auto na = a.node();
    return Tensor::from_op(Shape{1}, {s}, {a}, [na](std::span<const double> g) {
        std::vector<double> ga(na->data.size(), g[0]);
        na->accumulate(ga);
    });
}

Tensor sum(const Tensor& a, const std::vector<std::size_t>& axes) {
    Shape out_shape;
    auto map = std::make_shared<std::vector<std::size_t>>(reduction_map(a.shape(), axes, out_shape));
    std::vector<double> out(shape_numel(out_shape), 0.0);
    for (std::size_t i = 0; i < a.numel(); ++i) out[(*map)[i]] += a.at(i);
    auto na = a.node();
    return Tensor::from_op(out_shape, std::move(out), {a}, [na, map](std::span<const double> g) {
        std::vector<double> ga(na->data.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = g[(*map)[i]];
        na->accumulate(ga);
    });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor mean(const Tensor& a, const std::vector<std::size_t>& axes) {
    auto s = sum(a, axes);
    return scale(s, static_cast<double>(s.numel()) / static_cast<double>(a.numel()));
}

Tensor l2_norm(const Tensor& a) {
    double ss = 0.0;
    for (double v : a.data()) ss += v * v;
    double norm = std::sqrt(ss);
    auto na = a.node();
    return Tensor::from_op(Shape{1}, {norm}, {a}, [na, norm](std::span<const double> g) {
        if (norm == 0.0) return;
        std::vector<double> ga(na->data.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = g[0] * na->data[i] / norm;
        na->accumulate(ga);
    });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& first = parts.front().shape();
    if (axis >= first.size()) {
        throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(first));
    }
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto& p : parts) {
        if (p.rank() != first.size()) throw ShapeError("concat: rank mismatch");
        for (std::size_t d = 0; d < first.size(); ++d) {
            if (d != axis && p.shape()[d] != first[d]) {
                throw ShapeError("concat: shape mismatch " + shape_str(first) + " vs " + shape_str(p.shape()));
            }
        }
        out_shape[axis] += p.shape()[axis];
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
    for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

    std::vector<double> out(shape_numel(out_shape));
    std::vector<std::size_t> widths;
    std::size_t total = out_shape[axis] * inner;
    std::size_t offset = 0;
    for (const auto& p : parts) {
        std::size_t wdt = p.shape()[axis] * inner;
        for (std::size_t o = 0; o < outer; ++o) {
            std::copy_n(p.data().begin() + static_cast<std::ptrdiff_t>(o * wdt), wdt,
                        out.begin() + static_cast<std::ptrdiff_t>(o * total + offset));
        }
        widths.push_back(wdt);
        offset += wdt;
    }
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    return Tensor::from_op(out_shape, std::move(out), parts,
                           [nodes, widths, outer, total](std::span<const double> g) {
                               std::size_t off = 0;
                               for (std::size_t k = 0; k < nodes.size(); ++k) {
                                   std::size_t wdt = widths[k];
                                   if (nodes[k]->requires_grad) {
                                       std::vector<double> gk(outer * wdt);
                                       for (std::size_t o = 0; o < outer; ++o) {
                                           std::copy_n(g.begin() + static_cast<std::ptrdiff_t>(o * total + off), wdt,
                                                       gk.begin() + static_cast<std::ptrdiff_t>(o * wdt));
                                       }
                                       nodes[k]->accumulate(gk);
                                   }
                                   off += wdt;
                               }
                           });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
    }
    std::vector<double> out(a.data().begin(), a.data().end());
    auto na = a.node();
    return Tensor::from_op(std::move(shape), std::move(out), {a},
                           [na](std::span<const double> g) { na->accumulate(g); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimension mismatch " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    std::vector<double> out(m * n);
    Eigen::Map<const RowMat> am(a.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    Eigen::Map<const RowMat> bm(b.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
    Eigen::Map<RowMat>(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)).noalias() = am * bm;
    auto na = a.node(), nb = b.node();
    return Tensor::from_op(Shape{m, n}, std::move(out), {a, b}, [na, nb, m, k, n](std::span<const double> g) {
        auto mi = static_cast<Eigen::Index>(m), ki = static_cast<Eigen::Index>(k), ni = static_cast<Eigen::Index>(n);
        Eigen::Map<const RowMat> gm(g.data(), mi, ni);
        if (na->requires_grad) {
            std::vector<double> ga(m * k);
            Eigen::Map<const RowMat> bm(nb->data.data(), ki, ni);
            Eigen::Map<RowMat>(ga.data(), mi, ki).noalias() = gm * bm.transpose();
            na->accumulate(ga);
        }
        if (nb->requires_grad) {
            std::vector<double> gb(k * n);
            Eigen::Map<const RowMat> am(na->data.data(), mi, ki);
            Eigen::Map<RowMat>(gb.data(), ki, ni).noalias() = am.transpose() * gm;
            nb->accumulate(gb);
        }
    });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const std::size_t r = a.dim(0), c = a.dim(1);
    std::vector<double> out(r * c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.at(i * c + j);
    auto na = a.node();
    return Tensor::from_op(Shape{c, r}, std::move(out), {a}, [na, r, c](std::span<const double> g) {
        std::vector<double> ga(r * c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] = g[j * r + i];
        na->accumulate(ga);
    });
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
    require_rank(input, 4, "conv2d input");
    require_rank(kernel, 4, "conv2d kernel");
    const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t cout = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
    if (kernel.dim(1) != cin) {
        throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " expects " +
                         std::to_string(kernel.dim(1)) + " input channels, input " +
                         shape_str(input.shape()) + " has " + std::to_string(cin));
    }
    if (stride == 0) throw ShapeError("conv2d: stride must be positive");
    if (h + 2 * padding < kh || w + 2 * padding < kw) {
        throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " larger than padded input " +
                         shape_str(input.shape()));
    }
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
        throw ShapeError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(cout) + " output channels");
    }
    const std::size_t ho = (h + 2 * padding - kh) / stride + 1;
    const std::size_t wo = (w + 2 * padding - kw) / stride + 1;
    const std::size_t kk = cin * kh * kw, p = ho * wo;

    std::vector<double> out(n * cout * p);
    std::vector<double> cols(kk * p);
    Eigen::Map<const RowMat> wm(kernel.data().data(), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(kk));
    for (std::size_t b = 0; b < n; ++b) {
        im2col(input.data().data() + b * cin * h * w, cin, h, w, kh, kw, stride, padding, ho, wo, cols.data());
        Eigen::Map<const RowMat> cm(cols.data(), static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(p));
        Eigen::Map<RowMat> om(out.data() + b * cout * p, static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(p));
        om.noalias() = wm * cm;
        if (bias.defined()) {
            for (std::size_t c = 0; c < cout; ++c) om.row(static_cast<Eigen::Index>(c)).array() += bias.at(c);
        }
    }

    auto ni = input.node(), nk = kernel.node();
    NodePtr nbias = bias.defined() ? bias.node() : nullptr;
    std::vector<Tensor> parents{input, kernel};
    if (bias.defined()) parents.push_back(bias);
    return Tensor::from_op(
        Shape{n, cout, ho, wo}, std::move(out), parents,
        [=](std::span<const double> g) {
            auto kki = static_cast<Eigen::Index>(kk), pi = static_cast<Eigen::Index>(p),
                 ci = static_cast<Eigen::Index>(cout);
            Eigen::Map<const RowMat> wmat(nk->data.data(), ci, kki);
            std::vector<double> cbuf(kk * p);
            std::vector<double> gk(cout * kk, 0.0);
            std::vector<double> gi;
            if (ni->requires_grad) gi.assign(n * cin * h * w, 0.0);
            std::vector<double> gb(cout, 0.0);
            for (std::size_t b = 0; b < n; ++b) {
                Eigen::Map<const RowMat> gm(g.data() + b * cout * p, ci, pi);
                if (nk->requires_grad) {
                    im2col(ni->data.data() + b * cin * h * w, cin, h, w, kh, kw, stride, padding, ho, wo, cbuf.data());
                    Eigen::Map<const RowMat> cm(cbuf.data(), kki, pi);
                    Eigen::Map<RowMat>(gk.data(), ci, kki).noalias() += gm * cm.transpose();
                }
                if (ni->requires_grad) {
                    Eigen::Map<RowMat>(cbuf.data(), kki, pi).noalias() = wmat.transpose() * gm;
                    col2im(cbuf.data(), cin, h, w, kh, kw, stride, padding, ho, wo, gi.data() + b * cin * h * w);
                }
                if (nbias) {
                    for (std::size_t c = 0; c < cout; ++c) gb[c] += gm.row(static_cast<Eigen::Index>(c)).sum();
                }
            }
            if (nk->requires_grad) nk->accumulate(gk);
            if (ni->requires_grad) ni->accumulate(gi);
            if (nbias) nbias->accumulate(gb);
        });
}

Tensor upsample_nearest(const Tensor& input, std::size_t factor) {
    require_rank(input, 4, "upsample_nearest");
    if (factor == 0) throw ShapeError("upsample_nearest: factor must be at least 1");
    const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    const std::size_t oh = h * factor, ow = w * factor;
    std::vector<double> out(n * c * oh * ow);
    for (std::size_t s = 0; s < n * c; ++s) {
        for (std::size_t y = 0; y < oh; ++y) {
            for (std::size_t x = 0; x < ow; ++x) {
                out[(s * oh + y) * ow + x] = input.at((s * h + y / factor) * w + x / factor);
            }
        }
    }
    auto ni = input.node();
    return Tensor::from_op(Shape{n, c, oh, ow}, std::move(out), {input},
                           [ni, n, c, h, w, factor, oh, ow](std::span<const double> g) {
                               std::vector<double> gi(n * c * h * w, 0.0);
                               for (std::size_t s = 0; s < n * c; ++s)
                                   for (std::size_t y = 0; y < oh; ++y)
                                       for (std::size_t x = 0; x < ow; ++x)
                                           gi[(s * h + y / factor) * w + x / factor] += g[(s * oh + y) * ow + x];
                               ni->accumulate(gi);
                           });
}

Tensor avg_pool(const Tensor& input, std::size_t k) {
    require_rank(input, 4, "avg_pool");
    const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (k == 0 || h % k != 0 || w % k != 0) {
        throw ShapeError("avg_pool: window " + std::to_string(k) + " does not tile " + shape_str(input.shape()));
    }
    const std::size_t oh = h / k, ow = w / k;
    const double inv = 1.0 / static_cast<double>(k * k);
    std::vector<double> out(n * c * oh * ow, 0.0);
    for (std::size_t s = 0; s < n * c; ++s)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) out[(s * oh + y / k) * ow + x / k] += inv * input.at((s * h + y) * w + x);
    auto ni = input.node();
    return Tensor::from_op(Shape{n, c, oh, ow}, std::move(out), {input},
                           [ni, n, c, h, w, k, oh, ow, inv](std::span<const double> g) {
                               std::vector<double> gi(n * c * h * w);
                               for (std::size_t s = 0; s < n * c; ++s)
                                   for (std::size_t y = 0; y < h; ++y)
                                       for (std::size_t x = 0; x < w; ++x)
                                           gi[(s * h + y) * w + x] = inv * g[(s * oh + y / k) * ow + x / k];
                               ni->accumulate(gi);
                           });
}

namespace {

// Shared body of the instance/batch normalizations: `groups` lists, for each
// statistics group, the flat indices belonging to it.
Tensor normalize_groups(const Tensor& input, const std::vector<std::vector<std::size_t>>& groups,
                        double epsilon) {
    std::vector<double> out(input.numel());
    auto inv_std = std::make_shared<std::vector<double>>(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& idx = groups[gi];
        double m = 0.0;
        for (auto i : idx) m += input.at(i);
        m /= static_cast<double>(idx.size());
        double v = 0.0;
        for (auto i : idx) v += (input.at(i) - m) * (input.at(i) - m);
        v /= static_cast<double>(idx.size());
        double is = 1.0 / std::sqrt(v + epsilon);
        (*inv_std)[gi] = is;
        for (auto i : idx) out[i] = (input.at(i) - m) * is;
    }
    auto normalized = std::make_shared<std::vector<double>>(out);
    auto ni = input.node();
    auto groups_ptr = std::make_shared<std::vector<std::vector<std::size_t>>>(groups);
    return Tensor::from_op(input.shape(), std::move(out), {input},
                           [ni, groups_ptr, inv_std, normalized](std::span<const double> g) {
                               std::vector<double> gi(g.size());
                               for (std::size_t k = 0; k < groups_ptr->size(); ++k) {
                                   const auto& idx = (*groups_ptr)[k];
                                   double mg = 0.0, mgx = 0.0;
                                   for (auto i : idx) {
                                       mg += g[i];
                                       mgx += g[i] * (*normalized)[i];
                                   }
                                   mg /= static_cast<double>(idx.size());
                                   mgx /= static_cast<double>(idx.size());
                                   for (auto i : idx) gi[i] = (*inv_std)[k] * (g[i] - mg - (*normalized)[i] * mgx);
                               }
                               ni->accumulate(gi);
                           });
}

}  // namespace

Tensor normalize_instance(const Tensor& input, double epsilon) {
    require_rank(input, 4, "normalize_instance");
    const std::size_t slices = input.dim(0) * input.dim(1), hw = input.dim(2) * input.dim(3);
    std::vector<std::vector<std::size_t>> groups(slices);
    for (std::size_t s = 0; s < slices; ++s) {
        groups[s].resize(hw);
        for (std::size_t i = 0; i < hw; ++i) groups[s][i] = s * hw + i;
    }
    return normalize_groups(input, groups, epsilon);
}

Tensor normalize_batch(const Tensor& input, double epsilon) {
    require_rank(input, 4, "normalize_batch");
    const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    std::vector<std::vector<std::size_t>> groups(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < hw; ++i) groups[ch].push_back((b * c + ch) * hw + i);
    }
    return normalize_groups(input, groups, epsilon);
}

Tensor softmax(const Tensor& a, std::size_t axis) {
    if (axis >= a.rank()) {
        throw ShapeError("softmax: axis " + std::to_string(axis) + " out of range for shape " + shape_str(a.shape()));
    }
    std::size_t outer = 1, inner = 1;
    const std::size_t len = a.dim(axis);
    for (std::size_t d = 0; d < axis; ++d) outer *= a.dim(d);
    for (std::size_t d = axis + 1; d < a.rank(); ++d) inner *= a.dim(d);
    std::vector<double> out(a.numel());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            double mx = a.at(base);
            for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, a.at(base + k * inner));
            double z = 0.0;
            for (std::size_t k = 0; k < len; ++k) {
                out[base + k * inner] = std::exp(a.at(base + k * inner) - mx);
                z += out[base + k * inner];
            }
            for (std::size_t k = 0; k < len; ++k) out[base + k * inner] /= z;
        }
    }
    auto y = std::make_shared<std::vector<double>>(out);
    auto na = a.node();
    return Tensor::from_op(a.shape(), std::move(out), {a}, [na, y, outer, inner, len](std::span<const double> g) {
        std::vector<double> ga(g.size());
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t base = o * len * inner + i;
                double dot = 0.0;
                for (std::size_t k = 0; k < len; ++k) dot += g[base + k * inner] * (*y)[base + k * inner];
                for (std::size_t k = 0; k < len; ++k) {
                    const std::size_t j = base + k * inner;
                    ga[j] = (*y)[j] * (g[j] - dot);
                }
            }
        }
        na->accumulate(ga);
    });
}

Tensor binary_cross_entropy(const Tensor& pred, const Tensor& target, double clamp) {
    require_same_shape(pred, target, "binary_cross_entropy");
    const double n = static_cast<double>(pred.numel());
    double total = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        double p = std::clamp(pred.at(i), clamp, 1.0 - clamp);
        double t = target.at(i);
        total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    auto np = pred.node();
    auto tdata = std::make_shared<std::vector<double>>(target.data().begin(), target.data().end());
    return Tensor::from_op(Shape{1}, {total / n}, {pred}, [np, tdata, clamp, n](std::span<const double> g) {
        std::vector<double> gp(np->data.size(), 0.0);
        for (std::size_t i = 0; i < gp.size(); ++i) {
            double p = np->data[i];
            if (p < clamp || p > 1.0 - clamp) continue;
            double t = (*tdata)[i];
            gp[i] = g[0] * (-t / p + (1.0 - t) / (1.0 - p)) / n;
        }
        np->accumulate(gp);
    });
}

Tensor sigmoid_cross_entropy(const Tensor& logits, bool label) {
    const double n = static_cast<double>(logits.numel());
    auto softplus = [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
    double total = 0.0;
    for (double x : logits.data()) total += label ? softplus(-x) : softplus(x);
    auto nl = logits.node();
    return Tensor::from_op(Shape{1}, {total / n}, {logits}, [nl, label, n](std::span<const double> g) {
        std::vector<double> gl(nl->data.size());
        for (std::size_t i = 0; i < gl.size(); ++i) {
            double x = nl->data[i];
            double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            gl[i] = g[0] * (label ? s - 1.0 : s) / n;
        }
        nl->accumulate(gl);
    });
}

Tensor row_cosine(const Tensor& rows, const Tensor& v, double eps) {
    require_rank(rows, 2, "row_cosine");
    require_rank(v, 1, "row_cosine");
    const std::size_t r = rows.dim(0), c = rows.dim(1);
    if (v.dim(0) != c) {
        throw ShapeError("row_cosine: vector " + shape_str(v.shape()) + " does not match rows " + shape_str(rows.shape()));
    }
    double vn = 0.0;
    for (std::size_t j = 0; j < c; ++j) vn += v.at(j) * v.at(j);
    vn = std::sqrt(vn);
    std::vector<double> out(r, 0.0);
    std::vector<double> row_norm(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
        double dot = 0.0, rn = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            dot += rows.at(i * c + j) * v.at(j);
            rn += rows.at(i * c + j) * rows.at(i * c + j);
        }
        rn = std::sqrt(rn);
        row_norm[i] = rn;
        if (rn * vn > eps) out[i] = dot / (rn * vn);
    }
    auto cosines = std::make_shared<std::vector<double>>(out);
    auto nr = rows.node(), nv = v.node();
    return Tensor::from_op(Shape{r}, std::move(out), {rows, v},
                           [nr, nv, r, c, vn, row_norm, cosines, eps](std::span<const double> g) {
                               std::vector<double> gr(r * c, 0.0), gv(c, 0.0);
                               for (std::size_t i = 0; i < r; ++i) {
                                   double rn = row_norm[i];
                                   if (rn * vn <= eps || g[i] == 0.0) continue;
                                   double cs = (*cosines)[i];
                                   for (std::size_t j = 0; j < c; ++j) {
                                       double a = nr->data[i * c + j], b = nv->data[j];
                                       gr[i * c + j] = g[i] * (b / (rn * vn) - cs * a / (rn * rn));
                                       gv[j] += g[i] * (a / (rn * vn) - cs * b / (vn * vn));
                                   }
                               }
                               nr->accumulate(gr);
                               nv->accumulate(gv);
                           });
}

Tensor pairwise_distance(const Tensor& rows) {
    require_rank(rows, 2, "pairwise_distance");
    const std::size_t r = rows.dim(0), c = rows.dim(1);
    std::vector<double> out(r * r, 0.0);
    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a + 1; b < r; ++b) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                double d = rows.at(a * c + j) - rows.at(b * c + j);
                s += d * d;
            }
            out[a * r + b] = out[b * r + a] = std::sqrt(s);
        }
    }
    auto dist = std::make_shared<std::vector<double>>(out);
    auto nr = rows.node();
    return Tensor::from_op(Shape{r, r}, std::move(out), {rows}, [nr, dist, r, c](std::span<const double> g) {
        std::vector<double> gr(r * c, 0.0);
        for (std::size_t a = 0; a < r; ++a) {
            for (std::size_t b = 0; b < r; ++b) {
                double d = (*dist)[a * r + b];
                if (a == b || d == 0.0) continue;
                // d(a,b) depends on both rows; entry (a,b) pushes row a, entry (b,a) covers row b.
                double coeff = g[a * r + b] / d;
                for (std::size_t j = 0; j < c; ++j) {
                    double diff = nr->data[a * c + j] - nr->data[b * c + j];
                    gr[a * c + j] += coeff * diff;
                    gr[b * c + j] -= coeff * diff;
                }
            }
        }
        nr->accumulate(gr);
    });
}

}  // namespace sgs
