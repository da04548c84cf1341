#include "sgs/losses.hpp"

#include <cmath>
#include <random>

#include "sgs/error.hpp"
#include "sgs/ops.hpp"

namespace sgs {

namespace {

Tensor he_init(const Shape& shape, std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(shape[1] * shape[2] * shape[3]);
    auto t = gaussian_init(shape, std::sqrt(2.0 / fan_in), rng);
    t.set_requires_grad(false);
    return t;
}

Tensor mse_to(const Tensor& logits, double target) { return mean(square(add_scalar(logits, -target))); }

}  // namespace

void LossWeights::validate() const {
    for (double w : {alpha, lambda, delta, eta, tau, xi}) {
        if (!std::isfinite(w) || w < 0.0) throw ConfigError("loss weights must be finite and non-negative");
    }
}

Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits, GanMode mode) {
    if (mode == GanMode::LeastSquares) return add(mse_to(real_logits, 1.0), mse_to(fake_logits, 0.0));
    return add(sigmoid_cross_entropy(real_logits, true), sigmoid_cross_entropy(fake_logits, false));
}

Tensor generator_loss(const Tensor& fake_logits, GanMode mode) {
    if (mode == GanMode::LeastSquares) return mse_to(fake_logits, 1.0);
    return sigmoid_cross_entropy(fake_logits, true);
}

AdversarialLosses adversarial_losses(const PatchDiscriminator& disc, const Tensor& source, const Tensor& saliency,
                                     const Tensor& real, const Tensor& fake, GanMode mode) {
    auto real_logits = disc.forward(source, saliency, real);
    auto fake_detached = disc.forward(source, saliency, fake.detach());
    AdversarialLosses out;
    out.loss_d = discriminator_loss(real_logits, fake_detached, mode);
    out.loss_g = generator_loss(disc.forward(source, saliency, fake), mode);
    return out;
}

Tensor content_l1(const Tensor& target, const Tensor& fake) {
    return mean(abs(sub(as_batch(target), as_batch(fake))));
}

FeatureExtractor::FeatureExtractor(std::size_t channels, std::uint64_t seed) : channels_(channels) {
    std::mt19937_64 rng(seed);
    w1_ = he_init(Shape{8, channels, 3, 3}, rng);
    b1_ = Tensor::zeros(Shape{8});
    w2_ = he_init(Shape{16, 8, 3, 3}, rng);
    b2_ = Tensor::zeros(Shape{16});
}

std::array<Tensor, 2> FeatureExtractor::taps(const Tensor& image) const {
    auto x = as_batch(image);
    auto t1 = avg_pool(relu(conv2d(x, w1_, b1_, 1, 1)), 2);
    auto t2 = avg_pool(relu(conv2d(t1, w2_, b2_, 1, 1)), 2);
    return {t1, t2};
}

std::vector<double> FeatureExtractor::embed(const Tensor& image) const {
    NoGradGuard guard;
    auto t = taps(image);
    std::vector<double> out;
    for (const auto& tap : t) {
        auto m = mean(tap, {0, 2, 3});
        out.insert(out.end(), m.data().begin(), m.data().end());
    }
    return out;
}

Tensor perceptual(const FeatureExtractor& extractor, const Tensor& target, const Tensor& fake) {
    auto a = extractor.taps(target);
    auto b = extractor.taps(fake);
    return add(mean(square(sub(a[0], b[0]))), mean(square(sub(a[1], b[1]))));
}

ParsingOracle::ParsingOracle(std::size_t channels, std::uint64_t seed, double sharpness)
    : channels_(channels), sharpness_(sharpness) {
    std::mt19937_64 rng(seed);
    w1_ = he_init(Shape{16, channels, 3, 3}, rng);
    b1_ = Tensor::zeros(Shape{16});
    w2_ = he_init(Shape{kNumClasses, 16, 3, 3}, rng);
    b2_ = Tensor::zeros(Shape{kNumClasses});
}

Tensor ParsingOracle::probabilities(const Tensor& image) const {
    auto x = as_batch(image);
    auto logits = conv2d(relu(conv2d(x, w1_, b1_, 1, 1)), w2_, b2_, 1, 1);
    return softmax(scale(logits, sharpness_), 1);
}

Tensor bce_parsing(const ParsingOracle& oracle, const Tensor& target, const Tensor& fake) {
    Tensor target_probs;
    {
        NoGradGuard guard;
        target_probs = oracle.probabilities(target);
    }
    return binary_cross_entropy(oracle.probabilities(fake), target_probs);
}

Tensor total_objective(const LossParts& p, const LossWeights& w) {
    auto total = add(p.gan, scale(p.content, w.alpha));
    total = add(total, scale(p.perceptual, w.lambda));
    total = add(total, scale(p.bce, w.delta));
    total = add(total, scale(p.iag, w.eta));
    total = add(total, scale(p.itg, w.tau));
    if (p.ict.defined()) total = add(total, scale(p.ict, w.xi));
    return total;
}

}  // namespace sgs
