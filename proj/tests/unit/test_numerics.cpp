#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "sgs/checkpoint.hpp"
#include "sgs/error.hpp"
#include "sgs/ops.hpp"
#include "sgs/optim.hpp"
#include "test_support.hpp"

using namespace sgs;
using sgs::test::gradient_error;
using sgs::test::random_tensor;
using sgs::test::weighted_sum;

namespace {

// Quadruple-loop cross-correlation reference.
std::vector<double> naive_conv(const Tensor& x, const Tensor& k, const Tensor& b, std::size_t stride, std::size_t pad) {
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
    const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (w + 2 * pad - kw) / stride + 1;
    std::vector<double> out(n * cout * oh * ow, 0.0);
    for (std::size_t b_ = 0; b_ < n; ++b_)
        for (std::size_t o = 0; o < cout; ++o)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t xx = 0; xx < ow; ++xx) {
                    double s = b.defined() ? b.at(o) : 0.0;
                    for (std::size_t c = 0; c < cin; ++c)
                        for (std::size_t i = 0; i < kh; ++i)
                            for (std::size_t j = 0; j < kw; ++j) {
                                const auto iy = static_cast<std::ptrdiff_t>(y * stride + i) - static_cast<std::ptrdiff_t>(pad);
                                const auto ix = static_cast<std::ptrdiff_t>(xx * stride + j) - static_cast<std::ptrdiff_t>(pad);
                                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(h) || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                s += x.at(((b_ * cin + c) * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)) *
                                     k.at(((o * cin + c) * kh + i) * kw + j);
                            }
                    out[((b_ * cout + o) * oh + y) * ow + xx] = s;
                }
    return out;
}

}  // namespace

TEST_CASE("tensor constructor rejects bad data") {
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{2, 0}, {}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{1}, {std::nan("")}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{1}, {INFINITY}), ShapeError);
}

TEST_CASE("conv2d identity kernel reproduces the input") {
    std::mt19937_64 rng(1);
    auto x = random_tensor({1, 1, 3, 3}, rng);
    auto y = conv2d(x, Tensor(Shape{1, 1, 1, 1}, {1.0}), Tensor(), 1, 0);
    for (std::size_t i = 0; i < 9; ++i) CHECK(y.at(i) == x.at(i));
}

TEST_CASE("conv2d ones kernel with padding counts neighbours") {
    auto y = conv2d(Tensor::full({1, 1, 4, 4}, 1.0), Tensor::full({1, 1, 3, 3}, 1.0), Tensor(), 1, 1);
    REQUIRE(y.shape() == Shape{1, 1, 4, 4});
    CHECK(y.at(0) == 4.0);
    CHECK(y.at(3) == 4.0);
    CHECK(y.at(5) == 9.0);
    CHECK(y.at(10) == 9.0);
    CHECK(y.at(1) == 6.0);
}

TEST_CASE("seven stride-2 k4 convolutions take 256 to 2") {
    NoGradGuard guard;
    Tensor h = Tensor::zeros({1, 1, 256, 256});
    auto k = Tensor::full({1, 1, 4, 4}, 0.1);
    for (int i = 0; i < 7; ++i) h = conv2d(h, k, Tensor(), 2, 1);
    CHECK(h.shape() == Shape{1, 1, 2, 2});
}

TEST_CASE("conv2d matches the naive reference on random shapes") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> pick(1, 4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = static_cast<std::size_t>(pick(rng) % 2 + 1), cin = static_cast<std::size_t>(pick(rng));
        const std::size_t cout = static_cast<std::size_t>(pick(rng)), hw = static_cast<std::size_t>(pick(rng) + 5);
        const std::size_t k = trial % 2 ? 3 : 4, stride = static_cast<std::size_t>(pick(rng) % 2 + 1);
        const std::size_t pad = static_cast<std::size_t>(pick(rng) % 2);
        auto x = random_tensor({n, cin, hw, hw}, rng, -1, 1, false);
        auto w = random_tensor({cout, cin, k, k}, rng, -1, 1, false);
        auto b = random_tensor({cout}, rng, -1, 1, false);
        auto y = conv2d(x, w, b, stride, pad);
        auto ref = naive_conv(x, w, b, stride, pad);
        REQUIRE(y.numel() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(y.at(i) == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d rejects mismatched shapes") {
    CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 2, 4, 4}), Tensor::zeros({1, 3, 3, 3}), Tensor(), 1, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 1, 2, 2}), Tensor::zeros({1, 1, 3, 3}), Tensor(), 1, 0), ShapeError);
    CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 1, 4, 4}), Tensor::zeros({1, 1, 3, 3}), Tensor(), 0, 0), ShapeError);
}

TEST_CASE("upsample_nearest copies and its backward sums blocks") {
    auto one = Tensor(Shape{1, 1, 1, 1}, {5.0});
    auto up = upsample_nearest(one, 2);
    CHECK(up.shape() == Shape{1, 1, 2, 2});
    for (std::size_t i = 0; i < 4; ++i) CHECK(up.at(i) == 5.0);

    std::mt19937_64 rng(3);
    auto x = random_tensor({1, 2, 3, 3}, rng);
    auto same = upsample_nearest(x, 1);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(same.at(i) == x.at(i));

    backward(sum(upsample_nearest(x, 2)));
    for (double g : x.grad()) CHECK(g == 4.0);
    CHECK_THROWS_AS(upsample_nearest(x, 0), ShapeError);
}

TEST_CASE("instance normalization") {
    auto flat = normalize_instance(Tensor::full({1, 1, 3, 3}, 2.5));
    for (double v : flat.data()) CHECK(v == 0.0);

    std::mt19937_64 rng(4);
    auto x = random_tensor({1, 2, 4, 4}, rng, -3, 3, false);
    auto y = normalize_instance(x, 1e-5);
    for (std::size_t c = 0; c < 2; ++c) {
        double m = 0, v = 0;
        for (std::size_t i = 0; i < 16; ++i) m += x.at(c * 16 + i);
        m /= 16;
        for (std::size_t i = 0; i < 16; ++i) v += (x.at(c * 16 + i) - m) * (x.at(c * 16 + i) - m);
        v /= 16;
        double ym = 0, yv = 0;
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(y.at(c * 16 + i) == doctest::Approx((x.at(c * 16 + i) - m) / std::sqrt(v + 1e-5)).epsilon(1e-12));
            ym += y.at(c * 16 + i);
        }
        ym /= 16;
        for (std::size_t i = 0; i < 16; ++i) yv += (y.at(c * 16 + i) - ym) * (y.at(c * 16 + i) - ym);
        CHECK(std::abs(ym) < 1e-12);
        CHECK(yv / 16 == doctest::Approx(v / (v + 1e-5)).epsilon(1e-12));
    }
}

TEST_CASE("elementwise and reduction examples") {
    auto r = relu(Tensor(Shape{2}, {-1.0, 2.0}));
    CHECK(r.at(0) == 0.0);
    CHECK(r.at(1) == 2.0);
    CHECK(mean(Tensor(Shape{4}, {1, 2, 3, 4})).item() == 2.5);
    auto lr = leaky_relu(Tensor(Shape{2}, {-1.0, 3.0}), 0.2);
    CHECK(lr.at(0) == doctest::Approx(-0.2));
    CHECK(lr.at(1) == 3.0);
    CHECK(l2_norm(Tensor(Shape{2}, {3.0, 4.0})).item() == 5.0);
    CHECK_THROWS_AS(sum(Tensor::zeros({2, 2}), {2}), ShapeError);
    CHECK_THROWS_AS(concat({Tensor::zeros({1, 1, 2, 2}), Tensor::zeros({1, 1, 3, 3})}, 1), ShapeError);
    auto c = concat({Tensor::full({1, 1, 2, 2}, 1.0), Tensor::full({1, 2, 2, 2}, 2.0)}, 1);
    CHECK(c.shape() == Shape{1, 3, 2, 2});
    CHECK(c.at(3) == 1.0);
    CHECK(c.at(4) == 2.0);
}

TEST_CASE("l2_norm gradient matches central differences") {
    std::mt19937_64 rng(5);
    auto v = random_tensor({10}, rng);
    CHECK(gradient_error([](const std::vector<Tensor>& in) { return l2_norm(in[0]); }, {v}) < 1e-6);
}

TEST_CASE("backward basics") {
    std::mt19937_64 rng(6);
    auto x = random_tensor({5}, rng);
    backward(sum(x));
    for (double g : x.grad()) CHECK(g == 1.0);
    x.zero_grad();
    backward(sum(mul(x, x)));
    for (std::size_t i = 0; i < 5; ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 * x.at(i)));
    CHECK_THROWS_AS(backward(mul(x, x)), ShapeError);
}

TEST_CASE("backward is linear in its root") {
    std::mt19937_64 rng(7);
    auto x = random_tensor({6}, rng);
    auto f = [](const Tensor& t) { return sum(tanh(t)); };
    auto g = [](const Tensor& t) { return sum(square(t)); };
    backward(f(x));
    std::vector<double> gf(x.grad().begin(), x.grad().end());
    x.zero_grad();
    backward(g(x));
    std::vector<double> gg(x.grad().begin(), x.grad().end());
    x.zero_grad();
    backward(add(scale(f(x), 2.0), scale(g(x), -3.0)));
    for (std::size_t i = 0; i < 6; ++i) CHECK(x.grad()[i] == doctest::Approx(2.0 * gf[i] - 3.0 * gg[i]).epsilon(1e-12));
}

TEST_CASE("gradient accumulates across backward calls on leaves") {
    auto x = Tensor(Shape{2}, {1.0, 2.0}, true);
    backward(sum(x));
    backward(sum(x));
    CHECK(x.grad()[0] == 2.0);
}

TEST_CASE("no-grad mode records nothing") {
    auto x = Tensor(Shape{2}, {1.0, 2.0}, true);
    Tensor y;
    {
        NoGradGuard guard;
        CHECK_FALSE(grad_enabled());
        y = sum(mul(x, x));
    }
    CHECK(grad_enabled());
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("composite conv relu mean graph matches central differences") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        auto x = random_tensor({1, 2, 5, 5}, rng);
        auto w = random_tensor({3, 2, 3, 3}, rng);
        auto b = random_tensor({3}, rng);
        auto err = gradient_error(
            [](const std::vector<Tensor>& in) { return mean(relu(conv2d(in[0], in[1], in[2], 1, 1))); }, {x, w, b});
        CHECK(err < 1e-4);
    }
}

TEST_CASE("elementwise operations match central differences") {
    std::mt19937_64 rng(9);
    using Fn = std::function<Tensor(const std::vector<Tensor>&)>;
    const std::vector<std::pair<const char*, Fn>> cases = {
        {"add", [](const auto& in) { return weighted_sum(add(in[0], in[1])); }},
        {"sub", [](const auto& in) { return weighted_sum(sub(in[0], in[1])); }},
        {"mul", [](const auto& in) { return weighted_sum(mul(in[0], in[1])); }},
        {"relu", [](const auto& in) { return weighted_sum(relu(in[0])); }},
        {"leaky_relu", [](const auto& in) { return weighted_sum(leaky_relu(in[0], 0.2)); }},
        {"sigmoid", [](const auto& in) { return weighted_sum(sigmoid(in[0])); }},
        {"tanh", [](const auto& in) { return weighted_sum(tanh(in[0])); }},
        {"abs", [](const auto& in) { return weighted_sum(abs(in[0])); }},
        {"square", [](const auto& in) { return weighted_sum(square(in[0])); }},
        {"sum_axes", [](const auto& in) { return weighted_sum(sum(in[0], {1})); }},
        {"mean_axes", [](const auto& in) { return weighted_sum(mean(in[0], {0, 2})); }},
        {"concat", [](const auto& in) { return weighted_sum(concat({in[0], in[1]}, 1)); }},
        {"softmax", [](const auto& in) { return weighted_sum(softmax(in[0], 1)); }},
        {"matmul", [](const auto& in) { return weighted_sum(matmul(reshape(in[0], {6, 4}), transpose(reshape(in[1], {6, 4})))); }},
    };
    for (const auto& [name, fn] : cases) {
        CAPTURE(name);
        for (int trial = 0; trial < 5; ++trial) {
            auto a = random_tensor({2, 3, 4}, rng);
            auto b = random_tensor({2, 3, 4}, rng);
            CHECK(gradient_error(fn, {a, b}) < 1e-4);
        }
    }
}

TEST_CASE("adam with lr 0 leaves parameters unchanged") {
    Parameter p("w", Tensor(Shape{3}, {1.0, -2.0, 3.0}));
    backward(sum(square(p.value)));
    adam_step({&p}, AdamOptions{0.0, 0.5, 0.999, 1e-8});
    CHECK(p.value.at(0) == 1.0);
    CHECK(p.value.at(1) == -2.0);
    CHECK(p.step == 1);
}

TEST_CASE("adam defaults") {
    AdamOptions o;
    CHECK(o.lr == 0.0002);
    CHECK(o.beta1 == 0.5);
    CHECK(o.beta2 == 0.999);
}

TEST_CASE("adam single step matches the closed form") {
    Parameter p("w", Tensor(Shape{1}, {0.7}));
    backward(sum(p.value));  // grad = 1
    const AdamOptions o{0.01, 0.5, 0.999, 1e-8};
    adam_step({&p}, o);
    const double m = (1 - o.beta1) * 1.0, v = (1 - o.beta2) * 1.0;
    const double mhat = m / (1 - o.beta1), vhat = v / (1 - o.beta2);
    CHECK(p.value.at(0) == doctest::Approx(0.7 - o.lr * mhat / (std::sqrt(vhat) + o.eps)).epsilon(1e-15));
    CHECK(p.m1[0] == doctest::Approx(m));
    CHECK(p.m2[0] == doctest::Approx(v));
    CHECK_FALSE(p.value.has_grad());
}

TEST_CASE("adam rejects missing gradients") {
    Parameter p("w", Tensor(Shape{1}, {0.7}));
    CHECK_THROWS_AS(adam_step({&p}, AdamOptions{}), ShapeError);
}

TEST_CASE("learning-rate schedule is flat then linear") {
    CHECK(lr_factor(0, 2) == 1.0);
    CHECK(lr_factor(1, 2) == doctest::Approx(0.5));
    for (int e = 0; e < 20; ++e) CHECK(lr_factor(e, 40) == 1.0);
    for (int e = 20; e < 39; ++e) CHECK(lr_factor(e + 1, 40) < lr_factor(e, 40));
    CHECK(lr_factor(39, 40) > 0.0);
}

TEST_CASE("checkpoint round-trips values, moments and steps") {
    std::mt19937_64 rng(10);
    Parameter a("a.w", random_tensor({2, 3}, rng));
    Parameter b("b.w", random_tensor({4}, rng));
    backward(add(sum(square(a.value)), sum(b.value)));
    adam_step({&a, &b}, AdamOptions{});
    const auto path = std::filesystem::temp_directory_path() / "sgs_ckpt_test.bin";
    write_checkpoint(path, {&a, &b});

    Parameter a2("a.w", Tensor::zeros({2, 3}));
    Parameter b2("b.w", Tensor::zeros({4}));
    load_parameters(path, {&a2, &b2});
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a2.value.at(i) == a.value.at(i));
        CHECK(a2.m1[i] == a.m1[i]);
        CHECK(a2.m2[i] == a.m2[i]);
    }
    CHECK(a2.step == 1);

    Parameter wrong("a.w", Tensor::zeros({3, 2}));
    CHECK_THROWS_AS(load_parameters(path, {&wrong}), DataError);
    Parameter missing("c.w", Tensor::zeros({1}));
    CHECK_THROWS_AS(load_parameters(path, {&missing}), DataError);

    auto stored = read_checkpoint(path);
    CHECK(stored.count("a.w.m1") == 1);
    std::filesystem::remove(path);
}

TEST_CASE("operations are deterministic") {
    std::mt19937_64 r1(11), r2(11);
    auto x1 = random_tensor({1, 2, 6, 6}, r1), x2 = random_tensor({1, 2, 6, 6}, r2);
    auto k1 = random_tensor({2, 2, 3, 3}, r1), k2 = random_tensor({2, 2, 3, 3}, r2);
    auto y1 = normalize_instance(conv2d(x1, k1, Tensor(), 1, 1));
    auto y2 = normalize_instance(conv2d(x2, k2, Tensor(), 1, 1));
    for (std::size_t i = 0; i < y1.numel(); ++i) CHECK(y1.at(i) == y2.at(i));
}
