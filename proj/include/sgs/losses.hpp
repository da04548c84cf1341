#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sgs/network.hpp"
#include "sgs/tensor.hpp"

namespace sgs {

/// Weights of the combined generator objective.
struct LossWeights {
    double alpha = 100.0;   // content
    double lambda = 10.0;   // perceptual
    double delta = 15.0;    // parsing BCE
    double eta = 100.0;     // intra-class graph
    double tau = 100.0;     // inter-class graph
    double xi = 5.0;        // iterative cycle training

    void validate() const;
};

enum class GanMode { SigmoidCrossEntropy, LeastSquares };

/// Discriminator-side loss from real and fake logits.
Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits, GanMode mode);
/// Generator-side loss from fake logits.
Tensor generator_loss(const Tensor& fake_logits, GanMode mode);

struct AdversarialLosses {
    Tensor loss_d;
    Tensor loss_g;
};

/// Both adversarial terms for one sample. The fake image is detached inside
/// loss_d, so loss_d never sends gradient into the generator.
AdversarialLosses adversarial_losses(const PatchDiscriminator& disc, const Tensor& source, const Tensor& saliency,
                                     const Tensor& real, const Tensor& fake,
                                     GanMode mode = GanMode::SigmoidCrossEntropy);

/// Mean absolute difference.
Tensor content_l1(const Tensor& target, const Tensor& fake);

/// Fixed random convolutional feature stack with two average-pooling stages,
/// tapped after each pool. Stands in for a pretrained classifier.
class FeatureExtractor {
public:
    FeatureExtractor(std::size_t channels, std::uint64_t seed);

    std::array<Tensor, 2> taps(const Tensor& image) const;
    /// Spatial means of both taps, concatenated (24 values).
    std::vector<double> embed(const Tensor& image) const;

    std::size_t channels() const { return channels_; }

private:
    std::size_t channels_;
    Tensor w1_, b1_, w2_, b2_;
};

/// Sum over both taps of the mean squared feature difference.
Tensor perceptual(const FeatureExtractor& extractor, const Tensor& target, const Tensor& fake);

/// Fixed random per-pixel 12-way classifier standing in for a face parser.
class ParsingOracle {
public:
    ParsingOracle(std::size_t channels, std::uint64_t seed, double sharpness = 4.0);

    /// [1, 12, H, W] class probabilities summing to 1 per pixel.
    Tensor probabilities(const Tensor& image) const;

private:
    std::size_t channels_;
    double sharpness_;
    Tensor w1_, b1_, w2_, b2_;
};

/// Mean per-pixel per-class BCE of P(fake) against the detached P(target).
Tensor bce_parsing(const ParsingOracle& oracle, const Tensor& target, const Tensor& fake);

/// Scalar parts of the generator objective; an undefined `ict` counts as 0.
struct LossParts {
    Tensor gan;
    Tensor content;
    Tensor perceptual;
    Tensor bce;
    Tensor iag;
    Tensor itg;
    Tensor ict;
};

Tensor total_objective(const LossParts& parts, const LossWeights& weights);

}  // namespace sgs
