#include <cmath>
#include <random>

#include "doctest.h"
#include "sgs/error.hpp"
#include "sgs/losses.hpp"
#include "sgs/ops.hpp"
#include "test_support.hpp"

using namespace sgs;
using namespace sgs::test;

namespace {

Tensor scalar(double v) { return Tensor::full({1}, v); }

LossParts unit_parts() {
    return {scalar(1), scalar(1), scalar(1), scalar(1), scalar(1), scalar(1), scalar(1)};
}

}  // namespace

TEST_CASE("adversarial losses at zero logits") {
    auto z = Tensor::zeros({1, 1, 6, 6});
    CHECK(discriminator_loss(z, z, GanMode::SigmoidCrossEntropy).item() ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(generator_loss(z, GanMode::SigmoidCrossEntropy).item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("least squares adversarial losses") {
    auto ones = Tensor::full({1, 1, 6, 6}, 1.0);
    auto zeros = Tensor::zeros({1, 1, 6, 6});
    CHECK(discriminator_loss(ones, zeros, GanMode::LeastSquares).item() == 0.0);
    CHECK(discriminator_loss(zeros, ones, GanMode::LeastSquares).item() == 2.0);
    CHECK(generator_loss(zeros, GanMode::LeastSquares).item() == 1.0);
    CHECK(generator_loss(ones, GanMode::LeastSquares).item() == 0.0);
}

TEST_CASE("discriminator loss sends no gradient into the generator output") {
    NetworkConfig c;
    c.image_size = 32;
    PatchDiscriminator d(c);
    std::mt19937_64 rng(1);
    auto src = random_tensor({3, 32, 32}, rng, 0, 1, false);
    auto sal = random_tensor({1, 1, 32, 32}, rng, 0, 1, false);
    auto real = random_tensor({1, 32, 32}, rng, 0, 1, false);
    auto fake = random_tensor({1, 32, 32}, rng, 0, 1);
    auto adv = adversarial_losses(d, src, sal, real, fake);
    backward(adv.loss_d);
    CHECK_FALSE(fake.has_grad());
    backward(adv.loss_g);
    CHECK(fake.has_grad());
}

TEST_CASE("content loss") {
    CHECK(content_l1(Tensor::full({1, 4, 4}, 1.0), Tensor::zeros({1, 4, 4})).item() == 1.0);
    std::mt19937_64 rng(2);
    auto a = random_tensor({3, 5, 5}, rng, 0, 1, false);
    CHECK(content_l1(a, a).item() == 0.0);
    auto b = random_tensor({3, 5, 5}, rng, 0, 1, false);
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += std::abs(a.at(i) - b.at(i));
    CHECK(content_l1(a, b).item() == doctest::Approx(s / 75.0).epsilon(1e-13));
}

TEST_CASE("perceptual loss matches a two-tap loop and is symmetric") {
    FeatureExtractor ext(3, 11);
    std::mt19937_64 rng(3);
    auto a = random_tensor({3, 8, 8}, rng, 0, 1, false);
    auto b = random_tensor({3, 8, 8}, rng, 0, 1, false);
    CHECK(perceptual(ext, a, a).item() == 0.0);
    CHECK(perceptual(ext, a, b).item() == doctest::Approx(perceptual(ext, b, a).item()).epsilon(1e-14));
    auto ta = ext.taps(a), tb = ext.taps(b);
    CHECK(ta[0].shape() == Shape{1, 8, 4, 4});
    CHECK(ta[1].shape() == Shape{1, 16, 2, 2});
    double expect = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < ta[k].numel(); ++i) s += (ta[k].at(i) - tb[k].at(i)) * (ta[k].at(i) - tb[k].at(i));
        expect += s / static_cast<double>(ta[k].numel());
    }
    CHECK(perceptual(ext, a, b).item() == doctest::Approx(expect).epsilon(1e-13));
    CHECK(ext.embed(a).size() == 24);
}

TEST_CASE("parsing probabilities and BCE") {
    ParsingOracle oracle(1, 5);
    std::mt19937_64 rng(4);
    auto a = random_tensor({1, 6, 6}, rng, 0, 1, false);
    auto p = oracle.probabilities(a);
    REQUIRE(p.shape() == Shape{1, 12, 6, 6});
    for (std::size_t px = 0; px < 36; ++px) {
        double s = 0.0;
        for (std::size_t c = 0; c < 12; ++c) s += p.at(c * 36 + px);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Against itself the BCE reduces to the mean binary entropy.
    double entropy = 0.0;
    for (double q : p.data()) entropy -= q * std::log(q) + (1 - q) * std::log(1 - q);
    CHECK(bce_parsing(oracle, a, a).item() == doctest::Approx(entropy / 432.0).epsilon(1e-12));

    std::vector<double> onehot(24, 0.0);
    onehot[3] = onehot[12 + 7] = 1.0;
    Tensor t(Shape{1, 12, 1, 2}, onehot);
    // Only the log clamp keeps this off exact zero.
    CHECK(binary_cross_entropy(t, t).item() < 1e-11);
}

TEST_CASE("total objective weighting") {
    LossWeights w{1, 1, 1, 1, 1, 1};
    CHECK(total_objective(unit_parts(), w).item() == 7.0);
    auto parts = unit_parts();
    parts.ict = Tensor();
    CHECK(total_objective(parts, w).item() == 6.0);
    CHECK(total_objective(unit_parts(), LossWeights{}).item() == 1 + 100 + 10 + 15 + 100 + 100 + 5);

    LossParts p{scalar(0.5), scalar(0.25), scalar(2), scalar(0.125), scalar(3), scalar(0.75), scalar(1.5)};
    LossWeights q{2, 3, 4, 5, 6, 7};
    CHECK(total_objective(p, q).item() ==
          doctest::Approx(0.5 + 2 * 0.25 + 3 * 2 + 4 * 0.125 + 5 * 3 + 6 * 0.75 + 7 * 1.5).epsilon(1e-15));
}

TEST_CASE("default weights and validation") {
    LossWeights w;
    CHECK(w.alpha == 100.0);
    CHECK(w.lambda == 10.0);
    CHECK(w.delta == 15.0);
    CHECK(w.eta == 100.0);
    CHECK(w.tau == 100.0);
    CHECK(w.xi == 5.0);
    w.validate();
    w.tau = -1;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("loss gradients match central differences") {
    FeatureExtractor ext(1, 11);
    ParsingOracle oracle(1, 12);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        auto target = random_tensor({1, 8, 8}, rng, 0, 1, false);
        auto fake = random_tensor({1, 8, 8}, rng, 0, 1);
        CHECK(gradient_error([&](const std::vector<Tensor>& in) { return content_l1(target, in[0]); }, {fake}) <
              1e-4);
        CHECK(gradient_error([&](const std::vector<Tensor>& in) { return perceptual(ext, target, in[0]); },
                             {fake}) < 1e-4);
        CHECK(gradient_error([&](const std::vector<Tensor>& in) { return bce_parsing(oracle, target, in[0]); },
                             {fake}) < 1e-4);
        auto logits = random_tensor({1, 1, 3, 3}, rng, -2, 2);
        CHECK(gradient_error(
                  [&](const std::vector<Tensor>& in) { return generator_loss(in[0], GanMode::SigmoidCrossEntropy); },
                  {logits}) < 1e-4);
        CHECK(gradient_error([&](const std::vector<Tensor>& in) { return generator_loss(in[0], GanMode::LeastSquares); },
                             {logits}) < 1e-4);
    }
}
