#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sgs/layout.hpp"
#include "sgs/optim.hpp"
#include "sgs/tensor.hpp"

namespace sgs {

enum class NormKind { Instance, Batch };

struct NetworkConfig {
    std::size_t depth = 5;          // encoder downsamplings == decoder SI ResBlocks
    std::size_t base_channels = 8;
    std::size_t max_channels = 64;
    std::size_t in_channels = 3;    // source image channels (saliency is added on top)
    std::size_t out_channels = 1;
    bool use_saliency = true;
    std::size_t image_size = 64;
    std::uint64_t seed = 7;
    std::size_t si_hidden = 32;
    std::size_t disc_channels = 8;
    NormKind norm = NormKind::Instance;

    /// Throws ConfigError if the image size cannot pass through `depth`
    /// stride-2 layers or a field is out of range.
    void validate() const;
};

std::string config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const std::string& text);

/// Owns a stable set of named parameters; layers hold pointers into it.
class ParameterStore {
public:
    Parameter* add(const std::string& name, Tensor value);
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;

    /// Bitwise copy of every value, in registration order.
    std::vector<double> snapshot() const;

private:
    std::deque<Parameter> params_;
};

struct Conv {
    Parameter* weight = nullptr;
    Parameter* bias = nullptr;
    std::size_t stride = 1;
    std::size_t padding = 0;

    static Conv create(ParameterStore& store, const std::string& name, std::size_t cin, std::size_t cout,
                       std::size_t k, std::size_t stride, std::size_t padding, std::mt19937_64& rng);
    Tensor operator()(const Tensor& x) const;
};

/// Layout-conditioned normalization: gamma(S) * norm(x) + beta(S).
class SIModule {
public:
    SIModule() = default;
    SIModule(ParameterStore& store, const std::string& name, std::size_t channels, std::size_t hidden,
             NormKind norm, std::mt19937_64& rng);

    /// `onehot` is the [1, 12, h, w] indicator of the layout at x's resolution.
    Tensor forward(const Tensor& x, const Tensor& onehot) const;

    const Conv& gamma_head() const { return gamma_; }
    const Conv& beta_head() const { return beta_; }

private:
    Conv shared_;
    Conv gamma_;
    Conv beta_;
    NormKind norm_ = NormKind::Instance;
};

/// Two (SI -> relu -> conv3x3) legs plus an identity or 1x1 shortcut.
class SIResBlock {
public:
    SIResBlock(ParameterStore& store, const std::string& name, std::size_t cin, std::size_t cout,
               std::size_t hidden, NormKind norm, std::mt19937_64& rng);

    Tensor forward(const Tensor& x, const Tensor& onehot) const;

private:
    SIModule si1_, si2_;
    Conv conv1_, conv2_;
    bool project_ = false;
    Conv shortcut_;
};

/// [1, 12, h, w] one-hot of `layout` downsampled to (h, w).
Tensor layout_onehot_at(const SemanticLayout& layout, std::size_t size);

struct GeneratorOutput {
    Tensor image;                  // [1, Cout, H, W] in [0, 1]
    std::vector<Tensor> taps;      // encoder bottleneck, then each decoder block output
    std::vector<std::pair<std::size_t, std::size_t>> layout_sizes;  // layout (h, w) fed to each decoder block
    std::size_t bottleneck_size = 0;
};

class Generator {
public:
    explicit Generator(const NetworkConfig& config);
    Generator(const Generator&) = delete;
    Generator& operator=(const Generator&) = delete;

    /// `source` is [Cin, H, W] or [1, Cin, H, W]; `saliency` is [1, 1, H, W]
    /// (ignored and replaced by zeros when the config disables saliency).
    GeneratorOutput forward(const Tensor& source, const Tensor& saliency, const SemanticLayout& layout) const;

    const NetworkConfig& config() const { return config_; }
    std::vector<Parameter*> parameters() { return store_.all(); }
    std::vector<const Parameter*> parameters() const { return store_.all(); }
    std::vector<double> snapshot() const { return store_.snapshot(); }

    /// Stops (or resumes) gradient recording for every weight. A frozen
    /// generator still passes gradient through to its inputs.
    void set_trainable(bool trainable);

    void save(const std::filesystem::path& dir) const;
    void load_weights(const std::filesystem::path& dir);

private:
    NetworkConfig config_;
    ParameterStore store_;
    std::vector<Conv> encoder_;
    std::vector<bool> encoder_norm_;
    std::vector<SIResBlock> decoder_;
    Conv final_;
};

/// Pix2Pix-style patch discriminator over concat(source, saliency, candidate):
/// three stride-2 4x4 convolutions then a 3x3 valid convolution to one logit
/// channel.
class PatchDiscriminator {
public:
    explicit PatchDiscriminator(const NetworkConfig& config);
    PatchDiscriminator(const PatchDiscriminator&) = delete;
    PatchDiscriminator& operator=(const PatchDiscriminator&) = delete;

    Tensor forward(const Tensor& source, const Tensor& saliency, const Tensor& candidate) const;

    std::vector<Parameter*> parameters() { return store_.all(); }
    std::vector<const Parameter*> parameters() const { return store_.all(); }
    Parameter& output_bias() { return *layers_.back().bias; }

    static std::size_t patch_size(std::size_t image_size);

private:
    NetworkConfig config_;
    ParameterStore store_;
    std::vector<Conv> layers_;
};

/// Adds a leading batch axis to [C, H, W] tensors; passes [1, C, H, W] through.
Tensor as_batch(const Tensor& image);

}  // namespace sgs
