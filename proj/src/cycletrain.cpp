#include "sgs/cycletrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sgs/checkpoint.hpp"
#include "sgs/error.hpp"
#include "sgs/ops.hpp"
#include "sgs/parallel.hpp"

namespace sgs {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage, Direction direction, std::uint64_t salt) {
    const std::uint64_t slot = 2 * stage + (direction == Direction::PhotoToSketch ? 0 : 1);
    return mix(seed ^ mix(slot + 1) ^ salt);
}

constexpr std::uint64_t kShuffleSalt = 0x5BD1E9955BD1E995ull;

std::string stage_dir_name(std::size_t stage, Direction direction) {
    return "stage" + std::to_string(stage) + "_" + direction_tag(direction);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw DataError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string digest_parameters(const Generator& g) {
    const auto values = g.snapshot();
    return digest_bytes(values.data(), values.size() * sizeof(double));
}

// Per-step loss components in log order.
struct StepLosses {
    double gan_d = 0, gan_g = 0, content = 0, perc = 0, bce = 0, iag = 0, itg = 0, ict = 0, total = 0;

    void add_scaled(const StepLosses& o, double s) {
        gan_d += s * o.gan_d;
        gan_g += s * o.gan_g;
        content += s * o.content;
        perc += s * o.perc;
        bce += s * o.bce;
        iag += s * o.iag;
        itg += s * o.itg;
        ict += s * o.ict;
        total += s * o.total;
    }
};

void check_finite(double v, const char* name, std::size_t stage, Direction direction, int epoch, std::size_t step) {
    if (!std::isfinite(v)) {
        throw NumericError("non-finite " + std::string(name) + " loss at stage " + std::to_string(stage) +
                           " direction " + direction_tag(direction) + " epoch " + std::to_string(epoch + 1) +
                           " step " + std::to_string(step));
    }
}

CheckpointMetrics metrics_of(const MetricReport& r) { return {r.frechet_proxy, r.ssim_mean, r.fsim_mean}; }

nlohmann::ordered_json checkpoint_json(const Checkpoint& c, const std::filesystem::path& run_dir) {
    nlohmann::ordered_json j;
    j["stage"] = c.stage;
    j["direction"] = direction_tag(c.direction);
    j["path"] = std::filesystem::relative(c.dir, run_dir).generic_string();
    j["digest"] = c.digest;
    if (c.metrics) {
        j["frechet_proxy"] = c.metrics->frechet;
        j["ssim_mean"] = c.metrics->ssim;
        j["fsim_mean"] = c.metrics->fsim;
    }
    return j;
}

}  // namespace

std::string direction_tag(Direction direction) { return direction == Direction::PhotoToSketch ? "k" : "o"; }

Direction parse_direction(const std::string& text) {
    if (text == "k" || text == "photo2sketch") return Direction::PhotoToSketch;
    if (text == "o" || text == "sketch2photo") return Direction::SketchToPhoto;
    throw ConfigError("direction must be k, o, photo2sketch or sketch2photo, got '" + text + "'");
}

Direction opposite(Direction direction) {
    return direction == Direction::PhotoToSketch ? Direction::SketchToPhoto : Direction::PhotoToSketch;
}

void TrainConfig::validate() const {
    if (epochs < 2 || epochs % 2 != 0) {
        throw ConfigError("epochs must be even and at least 2, got " + std::to_string(epochs));
    }
    if (!std::isfinite(lr) || lr <= 0.0) throw ConfigError("lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (iterations == 0) throw ConfigError("iterations must be at least 1");
    if (!(parsing_sharpness > 0.0) || !std::isfinite(parsing_sharpness)) {
        throw ConfigError("parsing_sharpness must be positive");
    }
    if (ict_taps.size() != 5) {
        throw ConfigError("ict_taps must name exactly 5 taps, got " + std::to_string(ict_taps.size()));
    }
    for (std::size_t t : ict_taps) {
        if (t > depth) {
            throw ConfigError("ict_taps entry " + std::to_string(t) + " exceeds the " + std::to_string(depth + 1) +
                              " taps of a depth-" + std::to_string(depth) + " generator");
        }
    }
    weights.validate();
    network(Direction::PhotoToSketch, 0).validate();
}

NetworkConfig TrainConfig::network(Direction direction, std::size_t stage) const {
    NetworkConfig c;
    c.depth = depth;
    c.base_channels = base_channels;
    c.max_channels = max_channels;
    c.in_channels = direction == Direction::PhotoToSketch ? 3 : 1;
    c.out_channels = direction == Direction::PhotoToSketch ? 1 : 3;
    c.use_saliency = use_saliency;
    c.image_size = image_size;
    c.seed = stage_seed(seed, stage, direction, 0);
    c.si_hidden = si_hidden;
    c.disc_channels = disc_channels;
    c.norm = norm;
    return c;
}

std::string train_config_to_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["epochs"] = c.epochs;
    j["lr"] = c.lr;
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["batch_size"] = c.batch_size;
    j["weights"] = {{"alpha", c.weights.alpha}, {"lambda", c.weights.lambda}, {"delta", c.weights.delta},
                    {"eta", c.weights.eta},     {"tau", c.weights.tau},       {"xi", c.weights.xi}};
    j["seed"] = c.seed;
    j["image_size"] = c.image_size;
    j["depth"] = c.depth;
    j["use_saliency"] = c.use_saliency;
    j["base_channels"] = c.base_channels;
    j["max_channels"] = c.max_channels;
    j["si_hidden"] = c.si_hidden;
    j["disc_channels"] = c.disc_channels;
    j["norm"] = c.norm == NormKind::Instance ? "instance" : "batch";
    j["gan"] = c.gan == GanMode::SigmoidCrossEntropy ? "bce" : "lsgan";
    j["variance"] = c.variance == VarianceMode::Literal ? "literal" : "masked";
    j["iterations"] = c.iterations;
    j["ict_taps"] = c.ict_taps;
    j["extractor_seed"] = c.extractor_seed;
    j["parsing_seed"] = c.parsing_seed;
    j["parsing_sharpness"] = c.parsing_sharpness;
    return j.dump(2);
}

DirectedSample directed(const PairedSample& s, Direction direction) {
    if (direction == Direction::PhotoToSketch) {
        return {&s.photo, &s.saliency_photo, &s.layout_photo, &s.sketch, &s.saliency_sketch, &s.layout_sketch};
    }
    return {&s.sketch, &s.saliency_sketch, &s.layout_sketch, &s.photo, &s.saliency_photo, &s.layout_photo};
}

Tensor ict_loss(const Generator& frozen, const Tensor& real, const Tensor& fake, const Tensor& saliency,
                const SemanticLayout& layout, const std::vector<std::size_t>& taps) {
    if (taps.size() != 5) throw ConfigError("ict_taps must name exactly 5 taps, got " + std::to_string(taps.size()));
    GeneratorOutput real_out;
    {
        NoGradGuard guard;
        real_out = frozen.forward(real, saliency, layout);
    }
    auto fake_out = frozen.forward(fake, saliency, layout);
    Tensor total;
    for (std::size_t t : taps) {
        if (t >= fake_out.taps.size()) {
            throw ConfigError("ict tap " + std::to_string(t) + " does not exist; the generator has " +
                              std::to_string(fake_out.taps.size()) + " taps");
        }
        auto term = mean(abs(sub(fake_out.taps[t], real_out.taps[t])));
        total = total.defined() ? add(total, term) : term;
    }
    return total;
}

CorpusSplit split_corpus(std::vector<PairedSample> samples, std::size_t val_count) {
    if (samples.empty()) throw DataError("corpus is empty");
    CorpusSplit split;
    if (samples.size() > val_count) {
        const auto cut = samples.end() - static_cast<std::ptrdiff_t>(val_count);
        split.validation.assign(std::make_move_iterator(cut), std::make_move_iterator(samples.end()));
        samples.erase(cut, samples.end());
        split.train = std::move(samples);
    } else {
        split.train = samples;
        split.validation = std::move(samples);
    }
    return split;
}

LossNetworks::LossNetworks(const TrainConfig& config)
    : extractor_photo(3, config.extractor_seed),
      extractor_sketch(1, config.extractor_seed),
      parsing_photo(3, config.parsing_seed, config.parsing_sharpness),
      parsing_sketch(1, config.parsing_seed, config.parsing_sharpness) {}

const FeatureExtractor& LossNetworks::extractor(Direction direction) const {
    return direction == Direction::PhotoToSketch ? extractor_sketch : extractor_photo;
}

const ParsingOracle& LossNetworks::parsing(Direction direction) const {
    return direction == Direction::PhotoToSketch ? parsing_sketch : parsing_photo;
}

MetricReport evaluate(const Generator& generator, Direction direction, const std::vector<PairedSample>& samples,
                      const FeatureExtractor& extractor) {
    if (samples.size() < 2) throw DataError("evaluation needs at least 2 samples, got " + std::to_string(samples.size()));
    const std::size_t n = samples.size();
    MetricReport report;
    report.n = n;
    report.ids.resize(n);
    report.ssim.resize(n);
    report.fsim.resize(n);
    std::vector<std::vector<double>> real_emb(n), fake_emb(n);
    parallel_for(n, [&](std::size_t i) {
        NoGradGuard guard;
        const auto d = directed(samples[i], direction);
        auto fake = generator.forward(*d.source, d.source_saliency->to_tensor(), *d.source_layout).image;
        const auto gr = to_gray(*d.target), gf = to_gray(fake);
        report.ids[i] = samples[i].id;
        report.ssim[i] = ssim(gr, gf, report.ssim_options);
        report.fsim[i] = fsim(gr, gf, report.fsim_options);
        real_emb[i] = extractor.embed(*d.target);
        fake_emb[i] = extractor.embed(fake);
    });
    const auto width = static_cast<Eigen::Index>(real_emb[0].size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), width), b(static_cast<Eigen::Index>(n), width);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < width; ++c) {
            a(static_cast<Eigen::Index>(i), c) = real_emb[i][static_cast<std::size_t>(c)];
            b(static_cast<Eigen::Index>(i), c) = fake_emb[i][static_cast<std::size_t>(c)];
        }
    }
    double ssim_sum = 0.0, fsim_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ssim_sum += report.ssim[i];
        fsim_sum += report.fsim[i];
    }
    report.ssim_mean = ssim_sum / static_cast<double>(n);
    report.fsim_mean = fsim_sum / static_cast<double>(n);
    report.frechet_proxy = frechet_distance(a, b);
    return report;
}

StageResult train_stage(const TrainConfig& config, const LossNetworks& nets, Direction direction, std::size_t stage,
                        const CorpusSplit& data, const Generator* frozen, const std::filesystem::path& run_dir,
                        const ProgressFn& progress) {
    config.validate();
    if (data.train.empty()) throw DataError("training corpus is empty");
    for (const auto& s : data.train) {
        if (s.size() != config.image_size) {
            throw DataError("sample " + s.id + " is " + std::to_string(s.size()) + " px, config image_size is " +
                            std::to_string(config.image_size));
        }
    }

    const auto net_config = config.network(direction, stage);
    auto generator = std::make_shared<Generator>(net_config);
    PatchDiscriminator disc(net_config);
    const auto& extractor = nets.extractor(direction);
    const auto& parsing = nets.parsing(direction);

    StageResult result;
    if (frozen) result.frozen_before = digest_parameters(*frozen);
    const std::vector<double> frozen_values = frozen ? frozen->snapshot() : std::vector<double>{};

    const auto dir = run_dir / stage_dir_name(stage, direction);
    std::filesystem::create_directories(dir);
    std::ostringstream log;
    log << "step,l_gan_d,l_gan_g,l_content,l_perc,l_bce,l_iag,l_itg,l_ict,l_total\n";
    std::ostringstream epochs_csv;
    epochs_csv << "epoch,lr,d_mean,total_mean,ict_mean\n";

    std::mt19937_64 order_rng(stage_seed(config.seed, stage, direction, kShuffleSalt));
    std::vector<std::size_t> order(data.train.size());
    const auto g_params = generator->parameters();
    const auto d_params = disc.parameters();
    auto set_disc_trainable = [&](bool on) {
        for (Parameter* p : d_params) p->value.set_requires_grad(on);
    };

    std::size_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = config.lr * lr_factor(epoch, config.epochs);
        const AdamOptions adam{lr, config.beta1, config.beta2, 1e-8};
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng() % i]);

        StepLosses epoch_sum;
        std::size_t epoch_steps = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            ++step;

            std::vector<Tensor> fakes;
            for (std::size_t k = start; k < end; ++k) {
                const auto d = directed(data.train[order[k]], direction);
                fakes.push_back(generator->forward(*d.source, d.source_saliency->to_tensor(), *d.source_layout).image);
            }

            StepLosses batch;
            // Discriminator update on detached fakes.
            for (Parameter* p : d_params) p->value.zero_grad();
            for (std::size_t k = start; k < end; ++k) {
                const auto d = directed(data.train[order[k]], direction);
                const auto sal = d.source_saliency->to_tensor();
                auto loss_d = discriminator_loss(disc.forward(*d.source, sal, *d.target),
                                                 disc.forward(*d.source, sal, fakes[k - start].detach()), config.gan);
                batch.gan_d += inv_b * loss_d.item();
                backward(scale(loss_d, inv_b));
            }
            check_finite(batch.gan_d, "discriminator", stage, direction, epoch, step);
            adam_step(d_params, adam);

            // Generator update against the freshly updated discriminator.
            set_disc_trainable(false);
            for (std::size_t k = start; k < end; ++k) {
                const auto d = directed(data.train[order[k]], direction);
                const auto& fake = fakes[k - start];
                LossParts parts;
                parts.gan = generator_loss(disc.forward(*d.source, d.source_saliency->to_tensor(), fake), config.gan);
                parts.content = content_l1(*d.target, fake);
                parts.perceptual = perceptual(extractor, *d.target, fake);
                parts.bce = bce_parsing(parsing, *d.target, fake);
                SemanticGraphs target_graphs;
                {
                    NoGradGuard guard;
                    target_graphs = build_graphs(*d.target, *d.target_layout, config.variance);
                }
                const auto fake_graphs = build_graphs(fake, *d.target_layout, config.variance);
                parts.iag = iag_loss(target_graphs.intra, fake_graphs.intra);
                parts.itg = itg_loss(target_graphs.inter, fake_graphs.inter);
                if (frozen) {
                    parts.ict = ict_loss(*frozen, *d.target, fake, d.target_saliency->to_tensor(), *d.target_layout,
                                         config.ict_taps);
                }
                auto total = total_objective(parts, config.weights);
                StepLosses s;
                s.gan_g = parts.gan.item();
                s.content = parts.content.item();
                s.perc = parts.perceptual.item();
                s.bce = parts.bce.item();
                s.iag = parts.iag.item();
                s.itg = parts.itg.item();
                s.ict = parts.ict.defined() ? parts.ict.item() : 0.0;
                s.total = total.item();
                batch.add_scaled(s, inv_b);
                check_finite(s.total, "generator", stage, direction, epoch, step);
                backward(scale(total, inv_b));
            }
            set_disc_trainable(true);
            adam_step(g_params, adam);

            log << step << ',' << format_double(batch.gan_d) << ',' << format_double(batch.gan_g) << ','
                << format_double(batch.content) << ',' << format_double(batch.perc) << ','
                << format_double(batch.bce) << ',' << format_double(batch.iag) << ',' << format_double(batch.itg)
                << ',' << format_double(batch.ict) << ',' << format_double(batch.total) << '\n';
            epoch_sum.add_scaled(batch, 1.0);
            ++epoch_steps;
        }
        const double inv = 1.0 / static_cast<double>(epoch_steps);
        result.epoch_total.push_back(epoch_sum.total * inv);
        result.epoch_ict.push_back(epoch_sum.ict * inv);
        result.epoch_d.push_back(epoch_sum.gan_d * inv);
        epochs_csv << epoch + 1 << ',' << format_double(lr) << ',' << format_double(result.epoch_d.back()) << ','
                   << format_double(result.epoch_total.back()) << ',' << format_double(result.epoch_ict.back())
                   << '\n';
        if (progress) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "stage %zu %s epoch %d/%d d=%.4f total=%.4f ict=%.4f", stage,
                          direction_tag(direction).c_str(), epoch + 1, config.epochs, result.epoch_d.back(),
                          result.epoch_total.back(), result.epoch_ict.back());
            progress(buf);
        }
    }

    std::vector<const Parameter*> all;
    for (const Parameter* p : std::as_const(*generator).parameters()) all.push_back(p);
    for (const Parameter* p : std::as_const(disc).parameters()) all.push_back(p);
    write_checkpoint(dir / "model.bin", all);
    write_text(dir / "model.json", config_to_json(net_config) + "\n");
    write_text(dir / "losses.csv", log.str());
    write_text(dir / "epochs.csv", epochs_csv.str());

    result.report = evaluate(*generator, direction, data.validation, extractor);
    write_text(dir / "val_metrics.json", result.report.summary_json() + "\n");
    write_text(dir / "val_per_sample.csv", result.report.per_sample_csv());

    if (frozen) {
        result.frozen_after = digest_parameters(*frozen);
        const auto after = frozen->snapshot();
        result.frozen_bit_identical =
            after.size() == frozen_values.size() &&
            std::memcmp(after.data(), frozen_values.data(), after.size() * sizeof(double)) == 0;
    }
    result.checkpoint.stage = stage;
    result.checkpoint.direction = direction;
    result.checkpoint.dir = dir;
    result.checkpoint.digest = digest_file(dir / "model.bin");
    result.checkpoint.metrics = metrics_of(result.report);
    result.generator = std::move(generator);
    return result;
}

StagePair train_stage0(const TrainConfig& config, const CorpusSplit& data, const std::filesystem::path& run_dir,
                       const ProgressFn& progress) {
    const LossNetworks nets(config);
    StagePair pair;
    pair.photo_to_sketch = train_stage(config, nets, Direction::PhotoToSketch, 0, data, nullptr, run_dir, progress);
    pair.sketch_to_photo = train_stage(config, nets, Direction::SketchToPhoto, 0, data, nullptr, run_dir, progress);
    return pair;
}

StageResult load_stage(const TrainConfig& config, Direction direction, std::size_t stage,
                       const std::filesystem::path& run_dir) {
    const auto dir = run_dir / stage_dir_name(stage, direction);
    for (const char* name : {"model.bin", "model.json", "val_metrics.json"}) {
        if (!std::filesystem::exists(dir / name)) {
            throw DataError("missing checkpoint file " + (dir / name).string());
        }
    }
    auto net_config = config_from_json(read_text(dir / "model.json"));
    const auto expected = config.network(direction, stage);
    if (net_config.in_channels != expected.in_channels || net_config.out_channels != expected.out_channels) {
        throw DataError("checkpoint " + dir.string() + " belongs to the other direction");
    }
    StageResult result;
    result.generator = std::make_shared<Generator>(net_config);
    result.generator->load_weights(dir);
    try {
        const auto j = nlohmann::json::parse(read_text(dir / "val_metrics.json"));
        result.report.ssim_mean = j.at("ssim_mean").get<double>();
        result.report.fsim_mean = j.at("fsim_mean").get<double>();
        result.report.frechet_proxy = j.at("frechet_proxy").get<double>();
        result.report.n = j.at("n").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + (dir / "val_metrics.json").string() + ": " + e.what());
    }
    result.checkpoint.stage = stage;
    result.checkpoint.direction = direction;
    result.checkpoint.dir = dir;
    result.checkpoint.digest = digest_file(dir / "model.bin");
    result.checkpoint.metrics = metrics_of(result.report);
    return result;
}

std::vector<StageResult> run_iterative(const TrainConfig& config, const CorpusSplit& data,
                                       const std::filesystem::path& run_dir, bool reuse_stage0,
                                       const ProgressFn& progress) {
    config.validate();
    std::filesystem::create_directories(run_dir);
    const LossNetworks nets(config);
    std::vector<StageResult> results;
    if (reuse_stage0) {
        results.push_back(load_stage(config, Direction::PhotoToSketch, 0, run_dir));
        results.push_back(load_stage(config, Direction::SketchToPhoto, 0, run_dir));
    } else {
        results.push_back(train_stage(config, nets, Direction::PhotoToSketch, 0, data, nullptr, run_dir, progress));
        results.push_back(train_stage(config, nets, Direction::SketchToPhoto, 0, data, nullptr, run_dir, progress));
    }
    std::shared_ptr<Generator> latest_k = results[0].generator, latest_o = results[1].generator;
    for (std::size_t i = 0; i < config.iterations; ++i) {
        // Both directions of stage i+1 freeze the opposite generator of stage i.
        latest_k->set_trainable(false);
        latest_o->set_trainable(false);
        auto k = train_stage(config, nets, Direction::PhotoToSketch, i + 1, data, latest_o.get(), run_dir, progress);
        auto o = train_stage(config, nets, Direction::SketchToPhoto, i + 1, data, latest_k.get(), run_dir, progress);
        latest_k = k.generator;
        latest_o = o.generator;
        results.push_back(std::move(k));
        results.push_back(std::move(o));
    }

    nlohmann::ordered_json manifest;
    manifest["config"] = nlohmann::ordered_json::parse(train_config_to_json(config));
    manifest["seed"] = config.seed;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    for (const auto& r : results) {
        seeds[stage_dir_name(r.checkpoint.stage, r.checkpoint.direction)] =
            config.network(r.checkpoint.direction, r.checkpoint.stage).seed;
    }
    manifest["network_seeds"] = seeds;
    manifest["checkpoints"] = nlohmann::ordered_json::array();
    std::vector<Checkpoint> per_dir[2];
    for (const auto& r : results) {
        manifest["checkpoints"].push_back(checkpoint_json(r.checkpoint, run_dir));
        per_dir[r.checkpoint.direction == Direction::PhotoToSketch ? 0 : 1].push_back(r.checkpoint);
    }
    manifest["selected"] = {{"k", checkpoint_json(select_optimal(per_dir[0]), run_dir)},
                            {"o", checkpoint_json(select_optimal(per_dir[1]), run_dir)}};
    write_text(run_dir / "run.json", manifest.dump(2) + "\n");
    return results;
}

Checkpoint select_optimal(const std::vector<Checkpoint>& checkpoints) {
    if (checkpoints.empty()) throw ConfigError("select_optimal needs at least one checkpoint");
    const Checkpoint* best = nullptr;
    for (const auto& c : checkpoints) {
        if (!c.metrics) {
            throw ConfigError("checkpoint stage" + std::to_string(c.stage) + "_" + direction_tag(c.direction) +
                              " has no validation metrics");
        }
        if (!best) {
            best = &c;
            continue;
        }
        const auto& m = *c.metrics;
        const auto& b = *best->metrics;
        if (m.frechet < b.frechet || (m.frechet == b.frechet && m.ssim > b.ssim) ||
            (m.frechet == b.frechet && m.ssim == b.ssim && c.stage < best->stage)) {
            best = &c;
        }
    }
    return *best;
}

std::string digest_bytes(const void* data, std::size_t size) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest_file(const std::filesystem::path& path) {
    const auto bytes = read_text(path);
    return digest_bytes(bytes.data(), bytes.size());
}

}  // namespace sgs
