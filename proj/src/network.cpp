#include "sgs/network.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgs/checkpoint.hpp"
#include "sgs/error.hpp"
#include "sgs/ops.hpp"

namespace sgs {

namespace {

constexpr double kInitStd = 0.02;
constexpr std::uint64_t kDiscriminatorSalt = 0x9E3779B97F4A7C15ull;

Tensor normalize(const Tensor& x, NormKind kind) {
    return kind == NormKind::Instance ? normalize_instance(x, 1e-5) : normalize_batch(x, 1e-5);
}

}  // namespace

void NetworkConfig::validate() const {
    if (depth < 1 || depth > 10) throw ConfigError("depth must be in 1..10, got " + std::to_string(depth));
    if (base_channels == 0 || max_channels < base_channels) {
        throw ConfigError("base_channels must be positive and no larger than max_channels");
    }
    if (in_channels == 0 || out_channels == 0) throw ConfigError("in_channels and out_channels must be positive");
    if (si_hidden == 0 || disc_channels == 0) throw ConfigError("si_hidden and disc_channels must be positive");
    const std::size_t div = std::size_t{1} << depth;
    if (image_size == 0 || image_size % div != 0) {
        throw ConfigError("image_size " + std::to_string(image_size) + " must be divisible by 2^depth = " +
                          std::to_string(div));
    }
}

std::string config_to_json(const NetworkConfig& c) {
    nlohmann::ordered_json j;
    j["depth"] = c.depth;
    j["base_channels"] = c.base_channels;
    j["in_channels"] = c.in_channels;
    j["out_channels"] = c.out_channels;
    j["use_saliency"] = c.use_saliency;
    j["image_size"] = c.image_size;
    j["seed"] = c.seed;
    j["max_channels"] = c.max_channels;
    j["si_hidden"] = c.si_hidden;
    j["disc_channels"] = c.disc_channels;
    j["norm"] = c.norm == NormKind::Instance ? "instance" : "batch";
    return j.dump(2);
}

NetworkConfig config_from_json(const std::string& text) {
    NetworkConfig c;
    try {
        auto j = nlohmann::json::parse(text);
        c.depth = j.at("depth").get<std::size_t>();
        c.base_channels = j.at("base_channels").get<std::size_t>();
        c.in_channels = j.at("in_channels").get<std::size_t>();
        c.out_channels = j.at("out_channels").get<std::size_t>();
        c.use_saliency = j.at("use_saliency").get<bool>();
        c.image_size = j.at("image_size").get<std::size_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.max_channels = j.value("max_channels", c.max_channels);
        c.si_hidden = j.value("si_hidden", c.si_hidden);
        c.disc_channels = j.value("disc_channels", c.disc_channels);
        c.norm = j.value("norm", std::string("instance")) == "batch" ? NormKind::Batch : NormKind::Instance;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("model config: ") + ex.what());
    }
    c.validate();
    return c;
}

Parameter* ParameterStore::add(const std::string& name, Tensor value) {
    params_.emplace_back(name, std::move(value));
    return &params_.back();
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    for (auto& p : params_) out.push_back(&p);
    return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
    std::vector<const Parameter*> out;
    for (const auto& p : params_) out.push_back(&p);
    return out;
}

std::vector<double> ParameterStore::snapshot() const {
    std::vector<double> out;
    for (const auto& p : params_) out.insert(out.end(), p.value.data().begin(), p.value.data().end());
    return out;
}

Conv Conv::create(ParameterStore& store, const std::string& name, std::size_t cin, std::size_t cout,
                  std::size_t k, std::size_t stride, std::size_t padding, std::mt19937_64& rng) {
    Conv c;
    c.weight = store.add(name + ".w", gaussian_init(Shape{cout, cin, k, k}, kInitStd, rng));
    c.bias = store.add(name + ".b", Tensor::zeros(Shape{cout}, true));
    c.stride = stride;
    c.padding = padding;
    return c;
}

Tensor Conv::operator()(const Tensor& x) const { return conv2d(x, weight->value, bias->value, stride, padding); }

SIModule::SIModule(ParameterStore& store, const std::string& name, std::size_t channels, std::size_t hidden,
                   NormKind norm, std::mt19937_64& rng)
    : shared_(Conv::create(store, name + ".shared", kNumClasses, hidden, 3, 1, 1, rng)),
      gamma_(Conv::create(store, name + ".gamma", hidden, channels, 3, 1, 1, rng)),
      beta_(Conv::create(store, name + ".beta", hidden, channels, 3, 1, 1, rng)),
      norm_(norm) {}

Tensor SIModule::forward(const Tensor& x, const Tensor& onehot) const {
    if (x.rank() != 4 || onehot.rank() != 4 || x.dim(2) != onehot.dim(2) || x.dim(3) != onehot.dim(3)) {
        throw ShapeError("SI module: activation " + shape_str(x.shape()) + " and layout " +
                         shape_str(onehot.shape()) + " resolutions differ");
    }
    auto hidden = relu(shared_(onehot));
    return add(mul(gamma_(hidden), normalize(x, norm_)), beta_(hidden));
}

SIResBlock::SIResBlock(ParameterStore& store, const std::string& name, std::size_t cin, std::size_t cout,
                       std::size_t hidden, NormKind norm, std::mt19937_64& rng)
    : si1_(store, name + ".si1", cin, hidden, norm, rng),
      si2_(store, name + ".si2", cout, hidden, norm, rng),
      conv1_(Conv::create(store, name + ".conv1", cin, cout, 3, 1, 1, rng)),
      conv2_(Conv::create(store, name + ".conv2", cout, cout, 3, 1, 1, rng)),
      project_(cin != cout) {
    if (project_) shortcut_ = Conv::create(store, name + ".shortcut", cin, cout, 1, 1, 0, rng);
}

Tensor SIResBlock::forward(const Tensor& x, const Tensor& onehot) const {
    auto h = conv1_(relu(si1_.forward(x, onehot)));
    h = conv2_(relu(si2_.forward(h, onehot)));
    return add(h, project_ ? shortcut_(x) : x);
}

Tensor layout_onehot_at(const SemanticLayout& layout, std::size_t size) {
    if (size == 0 || layout.height() % size != 0 || layout.width() != layout.height()) {
        throw ShapeError("layout of " + std::to_string(layout.width()) + "x" + std::to_string(layout.height()) +
                         " cannot be reduced to " + std::to_string(size));
    }
    auto oh = one_hot(downsample_layout(layout, layout.height() / size));
    return reshape(oh, Shape{1, kNumClasses, size, size});
}

Tensor as_batch(const Tensor& image) {
    if (image.rank() == 4) {
        if (image.dim(0) != 1) throw ShapeError("expected a single-image batch, got " + shape_str(image.shape()));
        return image;
    }
    if (image.rank() == 3) return reshape(image, Shape{1, image.dim(0), image.dim(1), image.dim(2)});
    throw ShapeError("expected an image tensor, got " + shape_str(image.shape()));
}

Generator::Generator(const NetworkConfig& config) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    std::vector<std::size_t> widths;
    std::size_t cin = config_.in_channels + 1;
    for (std::size_t i = 0; i < config_.depth; ++i) {
        std::size_t cout = std::min(config_.base_channels << i, config_.max_channels);
        encoder_.push_back(Conv::create(store_, "g.enc" + std::to_string(i), cin, cout, 4, 2, 1, rng));
        // Outermost and innermost layers skip normalization.
        encoder_norm_.push_back(i > 0 && i + 1 < config_.depth);
        widths.push_back(cout);
        cin = cout;
    }
    for (std::size_t b = 0; b < config_.depth; ++b) {
        std::size_t cout = b + 1 < config_.depth ? widths[config_.depth - 2 - b] : config_.base_channels;
        decoder_.emplace_back(store_, "g.dec" + std::to_string(b), cin, cout, config_.si_hidden, config_.norm, rng);
        cin = cout;
    }
    final_ = Conv::create(store_, "g.out", cin, config_.out_channels, 3, 1, 1, rng);
}

GeneratorOutput Generator::forward(const Tensor& source, const Tensor& saliency, const SemanticLayout& layout) const {
    auto x = as_batch(source);
    const std::size_t size = x.dim(2);
    if (x.dim(1) != config_.in_channels) {
        throw ShapeError("generator expects " + std::to_string(config_.in_channels) + " source channels, got " +
                         shape_str(x.shape()));
    }
    if (x.dim(3) != size || size % (std::size_t{1} << config_.depth) != 0) {
        throw ShapeError("generator input " + shape_str(x.shape()) + " must be square with side divisible by " +
                         std::to_string(std::size_t{1} << config_.depth));
    }
    if (layout.height() != size || layout.width() != size) {
        throw ShapeError("layout size does not match generator input " + shape_str(x.shape()));
    }
    Tensor sal = config_.use_saliency ? as_batch(saliency) : Tensor::zeros(Shape{1, 1, size, size});
    if (sal.dim(1) != 1 || sal.dim(2) != size || sal.dim(3) != size) {
        throw ShapeError("saliency " + shape_str(sal.shape()) + " does not match generator input");
    }

    GeneratorOutput out;
    auto h = concat({x, sal}, 1);
    for (std::size_t i = 0; i < encoder_.size(); ++i) {
        h = encoder_[i](h);
        if (encoder_norm_[i]) h = normalize(h, config_.norm);
        h = i + 1 < encoder_.size() ? leaky_relu(h, 0.2) : relu(h);
    }
    out.bottleneck_size = h.dim(2);
    out.taps.push_back(h);
    for (const auto& block : decoder_) {
        h = upsample_nearest(h, 2);
        const std::size_t res = h.dim(2);
        out.layout_sizes.emplace_back(res, res);
        h = block.forward(h, layout_onehot_at(layout, res));
        out.taps.push_back(h);
    }
    auto t = tanh(final_(h));
    out.image = add_scalar(scale(t, 0.5), 0.5);
    return out;
}

void Generator::set_trainable(bool trainable) {
    for (Parameter* p : store_.all()) p->value.set_requires_grad(trainable);
}

void Generator::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_checkpoint(dir / "model.bin", store_.all());
    std::ofstream os(dir / "model.json");
    os << config_to_json(config_) << '\n';
    if (!os) throw DataError("cannot write " + (dir / "model.json").string());
}

void Generator::load_weights(const std::filesystem::path& dir) { load_parameters(dir / "model.bin", store_.all()); }

PatchDiscriminator::PatchDiscriminator(const NetworkConfig& config) : config_(config) {
    std::mt19937_64 rng(config_.seed ^ kDiscriminatorSalt);
    std::size_t cin = config_.in_channels + 1 + config_.out_channels;
    std::size_t width = config_.disc_channels;
    for (std::size_t i = 0; i < 3; ++i) {
        layers_.push_back(Conv::create(store_, "d.conv" + std::to_string(i), cin, width, 4, 2, 1, rng));
        cin = width;
        width *= 2;
    }
    layers_.push_back(Conv::create(store_, "d.conv3", cin, 1, 3, 1, 0, rng));
}

std::size_t PatchDiscriminator::patch_size(std::size_t image_size) {
    std::size_t s = image_size;
    for (int i = 0; i < 3; ++i) s = (s + 2 - 4) / 2 + 1;
    return s - 2;
}

Tensor PatchDiscriminator::forward(const Tensor& source, const Tensor& saliency, const Tensor& candidate) const {
    auto src = as_batch(source);
    auto cand = as_batch(candidate);
    const std::size_t size = src.dim(2);
    Tensor sal = config_.use_saliency ? as_batch(saliency) : Tensor::zeros(Shape{1, 1, size, size});
    if (src.dim(1) != config_.in_channels || cand.dim(1) != config_.out_channels) {
        throw ShapeError("discriminator channel mismatch: source " + shape_str(src.shape()) + ", candidate " +
                         shape_str(cand.shape()));
    }
    if (cand.dim(2) != size || cand.dim(3) != src.dim(3) || sal.dim(2) != size || sal.dim(3) != src.dim(3)) {
        throw ShapeError("discriminator inputs differ in size: source " + shape_str(src.shape()) + ", saliency " +
                         shape_str(sal.shape()) + ", candidate " + shape_str(cand.shape()));
    }
    auto h = concat({src, sal, cand}, 1);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = layers_[i](h);
        if (i + 1 == layers_.size()) break;
        if (i > 0) h = normalize_instance(h, 1e-5);
        h = leaky_relu(h, 0.2);
    }
    return h;
}

}  // namespace sgs
