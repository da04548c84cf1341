// Command-line entry point: datagen, train, train-iterative, synthesize, eval, graph-dump.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgs/cycletrain.hpp"
#include "sgs/datagen.hpp"
#include "sgs/error.hpp"
#include "sgs/graphrepr.hpp"
#include "sgs/layout.hpp"
#include "sgs/network.hpp"

namespace fs = std::filesystem;
using namespace sgs;

namespace {

struct RunConfig {
    TrainConfig train;
    std::string data;
    std::string out = "runs";
    std::string run_id = "run";
    std::string direction = "both";
    std::size_t val_count = 8;
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError("key '" + key + "': value must be finite");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Setting {
    std::string key;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Setting numeric(std::string key, std::string help, T TrainConfig::*field) {
    auto k = key;
    return {key, std::move(help),
            [k, field](RunConfig& c, const std::string& v) { c.train.*field = parse_number<T>(k, v); },
            [field](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return fmt(c.train.*field);
                else return std::to_string(c.train.*field);
            }};
}

Setting weight(std::string key, double LossWeights::*field) {
    auto k = key;
    return {key, "loss weight " + key,
            [k, field](RunConfig& c, const std::string& v) { c.train.weights.*field = parse_number<double>(k, v); },
            [field](const RunConfig& c) { return fmt(c.train.weights.*field); }};
}

std::vector<Setting> settings() {
    std::vector<Setting> s;
    s.push_back(numeric("epochs", "training epochs per stage (even, >= 2)", &TrainConfig::epochs));
    s.push_back(numeric("lr", "Adam learning rate", &TrainConfig::lr));
    s.push_back(numeric("beta1", "Adam beta1", &TrainConfig::beta1));
    s.push_back(numeric("beta2", "Adam beta2", &TrainConfig::beta2));
    s.push_back(numeric("batch_size", "samples per optimizer step", &TrainConfig::batch_size));
    s.push_back(weight("alpha", &LossWeights::alpha));
    s.push_back(weight("lambda", &LossWeights::lambda));
    s.push_back(weight("delta", &LossWeights::delta));
    s.push_back(weight("eta", &LossWeights::eta));
    s.push_back(weight("tau", &LossWeights::tau));
    s.push_back(weight("xi", &LossWeights::xi));
    s.push_back(numeric("seed", "run seed", &TrainConfig::seed));
    s.push_back(numeric("image_size", "image side in pixels", &TrainConfig::image_size));
    s.push_back(numeric("depth", "encoder downsamplings", &TrainConfig::depth));
    s.push_back({"use_saliency", "concatenate the saliency map to the input",
                 [](RunConfig& c, const std::string& v) { c.train.use_saliency = parse_bool("use_saliency", v); },
                 [](const RunConfig& c) { return std::string(c.train.use_saliency ? "true" : "false"); }});
    s.push_back(numeric("base_channels", "first encoder width", &TrainConfig::base_channels));
    s.push_back(numeric("max_channels", "encoder width cap", &TrainConfig::max_channels));
    s.push_back(numeric("si_hidden", "hidden width of SI modules", &TrainConfig::si_hidden));
    s.push_back(numeric("disc_channels", "first discriminator width", &TrainConfig::disc_channels));
    s.push_back({"norm", "instance or batch",
                 [](RunConfig& c, const std::string& v) {
                     if (v == "instance") c.train.norm = NormKind::Instance;
                     else if (v == "batch") c.train.norm = NormKind::Batch;
                     else throw ConfigError("key 'norm': expected instance or batch, got '" + v + "'");
                 },
                 [](const RunConfig& c) { return std::string(c.train.norm == NormKind::Instance ? "instance" : "batch"); }});
    s.push_back({"gan", "bce or lsgan",
                 [](RunConfig& c, const std::string& v) {
                     if (v == "bce") c.train.gan = GanMode::SigmoidCrossEntropy;
                     else if (v == "lsgan") c.train.gan = GanMode::LeastSquares;
                     else throw ConfigError("key 'gan': expected bce or lsgan, got '" + v + "'");
                 },
                 [](const RunConfig& c) {
                     return std::string(c.train.gan == GanMode::SigmoidCrossEntropy ? "bce" : "lsgan");
                 }});
    s.push_back({"variance", "literal or masked graph variance node",
                 [](RunConfig& c, const std::string& v) {
                     if (v == "literal") c.train.variance = VarianceMode::Literal;
                     else if (v == "masked") c.train.variance = VarianceMode::Masked;
                     else throw ConfigError("key 'variance': expected literal or masked, got '" + v + "'");
                 },
                 [](const RunConfig& c) {
                     return std::string(c.train.variance == VarianceMode::Literal ? "literal" : "masked");
                 }});
    s.push_back(numeric("iterations", "iterative cycle stages T", &TrainConfig::iterations));
    s.push_back({"ict_taps", "comma-separated generator tap indices for the ICT loss",
                 [](RunConfig& c, const std::string& v) {
                     std::vector<std::size_t> taps;
                     std::stringstream ss(v);
                     for (std::string item; std::getline(ss, item, ',');) {
                         item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
                         taps.push_back(parse_number<std::size_t>("ict_taps", item));
                     }
                     c.train.ict_taps = taps;
                 },
                 [](const RunConfig& c) {
                     std::string out;
                     for (std::size_t i = 0; i < c.train.ict_taps.size(); ++i) {
                         out += (i ? "," : "") + std::to_string(c.train.ict_taps[i]);
                     }
                     return out;
                 }});
    s.push_back(numeric("extractor_seed", "seed of the fixed perceptual extractor", &TrainConfig::extractor_seed));
    s.push_back(numeric("parsing_seed", "seed of the fixed parsing network", &TrainConfig::parsing_seed));
    s.push_back(numeric("parsing_sharpness", "logit scale of the parsing network", &TrainConfig::parsing_sharpness));
    s.push_back({"data", "corpus manifest.jsonl", [](RunConfig& c, const std::string& v) { c.data = v; },
                 [](const RunConfig& c) { return c.data; }});
    s.push_back({"out", "runs directory", [](RunConfig& c, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }});
    s.push_back({"run_id", "run name under the runs directory",
                 [](RunConfig& c, const std::string& v) { c.run_id = v; },
                 [](const RunConfig& c) { return c.run_id; }});
    s.push_back({"direction", "k (photo->sketch), o (sketch->photo) or both",
                 [](RunConfig& c, const std::string& v) {
                     if (v != "both") parse_direction(v);
                     c.direction = v;
                 },
                 [](const RunConfig& c) { return c.direction; }});
    s.push_back({"val_count", "trailing manifest entries held out for validation",
                 [](RunConfig& c, const std::string& v) { c.val_count = parse_number<std::size_t>("val_count", v); },
                 [](const RunConfig& c) { return std::to_string(c.val_count); }});
    return s;
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void apply_config_file(RunConfig& cfg, const std::vector<Setting>& table, const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("key 'config': cannot read " + path.string());
    std::size_t lineno = 0;
    for (std::string line; std::getline(is, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = unquote(trim(line.substr(eq + 1)));
        auto it = std::find_if(table.begin(), table.end(), [&](const Setting& s) { return s.key == key; });
        if (it == table.end()) throw ConfigError("key '" + key + "': unknown config key in " + path.string());
        it->set(cfg, value);
    }
}

std::string config_text(const RunConfig& cfg, const std::vector<Setting>& table) {
    std::string out;
    for (const auto& s : table) out += s.key + " = \"" + s.get(cfg) + "\"\n";
    return out;
}

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

/// Binds every setting as a --flag plus --config on `cmd`; `resolve` applies
/// defaults, then the config file, then flags given on the command line.
struct ConfigOptions {
    std::vector<Setting> table = settings();
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    std::string config_path;

    void bind(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file; flags override it");
        for (const auto& s : table) opts[s.key] = cmd->add_option("--" + dashed(s.key), raw[s.key], s.help);
    }

    RunConfig resolve() {
        RunConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, table, config_path);
        for (const auto& s : table) {
            if (opts[s.key]->count() > 0) s.set(cfg, raw[s.key]);
        }
        cfg.train.validate();
        return cfg;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw DataError("cannot write " + path.string());
}

void print_progress(const std::string& line) { std::cerr << line << '\n'; }

std::vector<Direction> directions_of(const RunConfig& cfg) {
    if (cfg.direction == "both") return {Direction::PhotoToSketch, Direction::SketchToPhoto};
    return {parse_direction(cfg.direction)};
}

CorpusSplit load_split(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ConfigError("key 'data': a corpus manifest is required");
    return split_corpus(load_corpus(cfg.data), cfg.val_count);
}

void write_run_manifest(const RunConfig& cfg, const std::vector<Setting>& table, const fs::path& run_dir,
                        const std::vector<StageResult>& results) {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(train_config_to_json(cfg.train));
    nlohmann::ordered_json rc;
    for (const auto& s : table) rc[s.key] = s.get(cfg);
    j["run_config"] = rc;
    j["replay"] = "sgs train --config " + (run_dir / "config.toml").generic_string();
    j["checkpoints"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        j["checkpoints"].push_back({{"stage", r.checkpoint.stage},
                                    {"direction", direction_tag(r.checkpoint.direction)},
                                    {"path", fs::relative(r.checkpoint.dir, run_dir).generic_string()},
                                    {"network_seed", cfg.train.network(r.checkpoint.direction, r.checkpoint.stage).seed},
                                    {"digest", r.checkpoint.digest},
                                    {"frechet_proxy", r.report.frechet_proxy},
                                    {"ssim_mean", r.report.ssim_mean},
                                    {"fsim_mean", r.report.fsim_mean}});
    }
    write_text(run_dir / "run.json", j.dump(2) + "\n");
}

int cmd_train(const RunConfig& cfg, const std::vector<Setting>& table) {
    const auto data = load_split(cfg);
    const fs::path run_dir = fs::path(cfg.out) / cfg.run_id;
    fs::create_directories(run_dir);
    write_text(run_dir / "config.toml", config_text(cfg, table));
    const LossNetworks nets(cfg.train);
    std::vector<StageResult> results;
    for (auto d : directions_of(cfg)) {
        results.push_back(train_stage(cfg.train, nets, d, 0, data, nullptr, run_dir, print_progress));
        std::cout << "checkpoint " << results.back().checkpoint.dir.generic_string() << '\n';
    }
    write_run_manifest(cfg, table, run_dir, results);
    return 0;
}

int cmd_train_iterative(const RunConfig& cfg, const std::vector<Setting>& table, bool reuse_stage0) {
    const auto data = load_split(cfg);
    const fs::path run_dir = fs::path(cfg.out) / cfg.run_id;
    fs::create_directories(run_dir);
    write_text(run_dir / "config.toml", config_text(cfg, table));
    auto results = run_iterative(cfg.train, data, run_dir, reuse_stage0, print_progress);
    for (const auto& r : results) std::cout << "checkpoint " << r.checkpoint.dir.generic_string() << '\n';
    return 0;
}

struct LoadedModel {
    std::unique_ptr<Generator> generator;
    Direction direction;
};

LoadedModel load_model(const fs::path& dir) {
    if (!fs::exists(dir / "model.json") || !fs::exists(dir / "model.bin")) {
        throw DataError("missing checkpoint: " + dir.string() + " lacks model.json or model.bin");
    }
    std::ifstream is(dir / "model.json");
    std::stringstream ss;
    ss << is.rdbuf();
    LoadedModel m;
    auto config = config_from_json(ss.str());
    m.generator = std::make_unique<Generator>(config);
    m.generator->load_weights(dir);
    m.direction = config.in_channels == 3 ? Direction::PhotoToSketch : Direction::SketchToPhoto;
    return m;
}

std::vector<PairedSample> select_samples(const std::string& manifest, const std::string& split, std::size_t val_count) {
    if (manifest.empty()) throw ConfigError("key 'data': a corpus manifest is required");
    auto samples = load_corpus(manifest);
    if (split == "all") return samples;
    auto parts = split_corpus(std::move(samples), val_count);
    if (split == "val") return parts.validation;
    if (split == "train") return parts.train;
    throw ConfigError("key 'split': expected val, train or all, got '" + split + "'");
}

Tensor to_rgb(const Tensor& image) {
    Tensor x = image.rank() == 4 ? Tensor(Shape{image.dim(1), image.dim(2), image.dim(3)},
                                          std::vector<double>(image.data().begin(), image.data().end()))
                                 : image;
    if (x.dim(0) == 3) return x;
    std::vector<double> rgb;
    for (int c = 0; c < 3; ++c) rgb.insert(rgb.end(), x.data().begin(), x.data().end());
    return Tensor(Shape{3, x.dim(1), x.dim(2)}, std::move(rgb));
}

int cmd_synthesize(const fs::path& checkpoint, const std::string& manifest, const std::string& split,
                   std::size_t val_count, const fs::path& out) {
    auto model = load_model(checkpoint);
    const auto samples = select_samples(manifest, split, val_count);
    fs::create_directories(out);
    NoGradGuard guard;
    const bool to_sketch = model.direction == Direction::PhotoToSketch;
    std::vector<std::array<Tensor, 3>> rows;
    for (const auto& s : samples) {
        const auto d = directed(s, model.direction);
        auto fake = model.generator->forward(*d.source, d.source_saliency->to_tensor(), *d.source_layout).image;
        auto image = Tensor(Shape{fake.dim(1), fake.dim(2), fake.dim(3)},
                            std::vector<double>(fake.data().begin(), fake.data().end()));
        write_pnm(out / (s.id + (to_sketch ? "_fake.pgm" : "_fake.ppm")), image_to_pnm(image));
        rows.push_back({to_rgb(*d.source), to_rgb(image), to_rgb(*d.target)});
    }
    // Contact sheet: one row per sample with source | synthesized | target.
    if (!rows.empty()) {
        const std::size_t h = rows[0][0].dim(1), w = rows[0][0].dim(2), gap = 2;
        const std::size_t sheet_w = 3 * w + 2 * gap, sheet_h = rows.size() * h + (rows.size() - 1) * gap;
        std::vector<double> sheet(3 * sheet_w * sheet_h, 1.0);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t col = 0; col < 3; ++col) {
                const auto data = rows[r][col].data();
                for (std::size_t c = 0; c < 3; ++c) {
                    for (std::size_t y = 0; y < h; ++y) {
                        for (std::size_t x = 0; x < w; ++x) {
                            sheet[c * sheet_w * sheet_h + (r * (h + gap) + y) * sheet_w + col * (w + gap) + x] =
                                data[c * h * w + y * w + x];
                        }
                    }
                }
            }
        }
        write_pnm(out / "contact_sheet.ppm", image_to_pnm(Tensor(Shape{3, sheet_h, sheet_w}, std::move(sheet))));
    }
    std::cout << "wrote " << samples.size() << " images to " << out.generic_string() << '\n';
    return 0;
}

int cmd_eval(const fs::path& checkpoint, const std::string& manifest, const std::string& split, std::size_t val_count,
             const fs::path& out, std::uint64_t extractor_seed) {
    auto model = load_model(checkpoint);
    const auto samples = select_samples(manifest, split, val_count);
    fs::create_directories(out);
    const FeatureExtractor extractor(model.direction == Direction::PhotoToSketch ? 1 : 3, extractor_seed);
    const auto report = evaluate(*model.generator, model.direction, samples, extractor);
    write_text(out / "val_metrics.json", report.summary_json() + "\n");
    write_text(out / "val_per_sample.csv", report.per_sample_csv());
    std::cout << report.summary_json() << '\n';
    return 0;
}

int cmd_graph_dump(const std::string& manifest, const std::string& id, std::size_t index, const std::string& side,
                   const std::string& variance, const std::string& out) {
    if (manifest.empty()) throw ConfigError("key 'data': a corpus manifest is required");
    const auto entries = read_manifest(manifest);
    if (entries.empty()) throw DataError("manifest " + manifest + " is empty");
    std::size_t pick = index;
    if (!id.empty()) {
        auto it = std::find_if(entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.id == id; });
        if (it == entries.end()) throw DataError("sample '" + id + "' is not in " + manifest);
        pick = static_cast<std::size_t>(it - entries.begin());
    }
    if (pick >= entries.size()) {
        throw ConfigError("key 'index': " + std::to_string(pick) + " is out of range for " +
                          std::to_string(entries.size()) + " samples");
    }
    const auto sample = load_sample(fs::path(manifest).parent_path(), entries[pick]);
    VarianceMode mode;
    if (variance == "literal") mode = VarianceMode::Literal;
    else if (variance == "masked") mode = VarianceMode::Masked;
    else throw ConfigError("key 'variance': expected literal or masked, got '" + variance + "'");
    SemanticGraphs graphs;
    if (side == "sketch") graphs = build_graphs(sample.sketch, sample.layout_sketch, mode);
    else if (side == "photo") graphs = build_graphs(sample.photo, sample.layout_photo, mode);
    else throw ConfigError("key 'side': expected photo or sketch, got '" + side + "'");
    const auto json = graphs_to_json(graphs);
    if (out.empty()) std::cout << json << '\n';
    else write_text(out, json + "\n");
    return 0;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

int fail(int code, const char* kind, const std::string& message) {
    std::cerr << "error code=" << code << " kind=" << kind << " message=\"" << escape(message) << "\"\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-graph photo/sketch synthesis toolkit"};
    app.require_subcommand(1);

    DatagenOptions gen;
    std::size_t gen_n = 32;
    std::string gen_mode = "aligned", gen_out = "corpus";
    auto* datagen = app.add_subcommand("datagen", "generate a paired synthetic corpus");
    datagen->add_option("--n", gen_n, "number of samples")->capture_default_str();
    datagen->add_option("--size", gen.size, "image side (32, 64, 128 or 256)")->capture_default_str();
    datagen->add_option("--seed", gen.seed, "corpus seed")->capture_default_str();
    datagen->add_option("--mode", gen_mode, "aligned or deformed")->capture_default_str();
    datagen->add_option("--glasses-fraction", gen.glasses_fraction, "share of samples wearing glasses")
        ->capture_default_str();
    datagen->add_option("--out", gen_out, "output directory")->capture_default_str();

    ConfigOptions train_opts;
    auto* train = app.add_subcommand("train", "stage-0 training of one or both directions");
    train_opts.bind(train);

    ConfigOptions iter_opts;
    bool reuse_stage0 = false;
    auto* train_iter = app.add_subcommand("train-iterative", "stage 0 plus T iterative cycle-training stages");
    iter_opts.bind(train_iter);
    train_iter->add_flag("--reuse-stage0", reuse_stage0, "load stage 0 from the run directory instead of training it");

    std::string ckpt, manifest, split = "val", out, graph_id, side = "sketch", variance = "literal";
    std::size_t val_count = 8, graph_index = 0;
    std::uint64_t extractor_seed = TrainConfig{}.extractor_seed;
    auto* synth = app.add_subcommand("synthesize", "run a generator checkpoint over a corpus");
    synth->add_option("--checkpoint", ckpt, "stage directory holding model.json and model.bin")->required();
    synth->add_option("--data", manifest, "corpus manifest.jsonl")->required();
    synth->add_option("--split", split, "val, train or all")->capture_default_str();
    synth->add_option("--val-count", val_count, "trailing entries held out for validation")->capture_default_str();
    synth->add_option("--out", out, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "SSIM, FSIM and Frechet proxy of a checkpoint");
    eval->add_option("--checkpoint", ckpt, "stage directory holding model.json and model.bin")->required();
    eval->add_option("--data", manifest, "corpus manifest.jsonl")->required();
    eval->add_option("--split", split, "val, train or all")->capture_default_str();
    eval->add_option("--val-count", val_count, "trailing entries held out for validation")->capture_default_str();
    eval->add_option("--extractor-seed", extractor_seed, "seed of the embedding network")->capture_default_str();
    eval->add_option("--out", out, "output directory")->required();

    auto* graph = app.add_subcommand("graph-dump", "emit graph nodes and edges of one sample as JSON");
    graph->add_option("--data", manifest, "corpus manifest.jsonl")->required();
    graph->add_option("--id", graph_id, "sample id (overrides --index)");
    graph->add_option("--index", graph_index, "sample position in the manifest")->capture_default_str();
    graph->add_option("--side", side, "photo or sketch")->capture_default_str();
    graph->add_option("--variance", variance, "literal or masked")->capture_default_str();
    graph->add_option("--out", out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "config", e.what());
    }

    try {
        if (datagen->parsed()) {
            gen.mode = parse_corpus_mode(gen_mode);
            const auto path = generate_corpus(gen_n, gen, gen_out);
            write_text(fs::path(gen_out) / "stats.json", corpus_stats(path).to_json() + "\n");
            std::cout << "manifest " << path.generic_string() << '\n';
            return 0;
        }
        if (train->parsed()) return cmd_train(train_opts.resolve(), train_opts.table);
        if (train_iter->parsed()) return cmd_train_iterative(iter_opts.resolve(), iter_opts.table, reuse_stage0);
        if (synth->parsed()) return cmd_synthesize(ckpt, manifest, split, val_count, out);
        if (eval->parsed()) return cmd_eval(ckpt, manifest, split, val_count, out, extractor_seed);
        if (graph->parsed()) return cmd_graph_dump(manifest, graph_id, graph_index, side, variance, out);
    } catch (const Error& e) {
        const int code = static_cast<int>(e.kind());
        const char* kind = e.kind() == ErrorKind::Config ? "config" : e.kind() == ErrorKind::Data ? "data" : "numeric";
        return fail(code, kind, e.what());
    } catch (const std::exception& e) {
        return fail(3, "data", e.what());
    }
    return 0;
}
