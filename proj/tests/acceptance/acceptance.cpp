// Acceptance checks. Prints one PASS/FAIL line per criterion; pass criterion
// numbers as arguments to run a subset.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "graph_oracle.hpp"
#include "sgs/cycletrain.hpp"
#include "sgs/datagen.hpp"
#include "sgs/error.hpp"
#include "sgs/graphrepr.hpp"
#include "sgs/losses.hpp"
#include "sgs/metrics.hpp"
#include "sgs/network.hpp"
#include "sgs/ops.hpp"
#include "test_support.hpp"

#ifndef SGS_CLI_PATH
#define SGS_CLI_PATH "sgs"
#endif

using namespace sgs;
using namespace sgs::test;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("sgs_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

NetworkConfig small_generator(std::size_t in, std::size_t out, std::size_t depth, std::size_t size) {
    NetworkConfig c;
    c.depth = depth;
    c.image_size = size;
    c.in_channels = in;
    c.out_channels = out;
    c.base_channels = 2;
    c.max_channels = 4;
    c.si_hidden = 3;
    c.disc_channels = 2;
    return c;
}

// 1. Central finite differences over every differentiable building block.
Outcome gradient_suite() {
    const auto t0 = Clock::now();
    constexpr int kInstances = 5;
    constexpr double kTol = 1e-4;
    std::mt19937_64 rng(101);
    std::map<std::string, double> worst;
    auto record = [&](const std::string& name, double err) { worst[name] = std::max(worst[name], err); };

    FeatureExtractor ext(1, 11);
    ParsingOracle parser(1, 12);
    NetworkConfig dc = small_generator(1, 1, 4, 32);
    PatchDiscriminator disc(dc);
    Generator frozen(small_generator(1, 3, 4, 16));
    frozen.set_trainable(false);

    for (int i = 0; i < kInstances; ++i) {
        auto x = random_tensor({1, 2, 6, 6}, rng);
        auto w = random_tensor({3, 2, 3, 3}, rng);
        auto b = random_tensor({3}, rng);
        record("conv", gradient_error([](const auto& in) { return weighted_sum(conv2d(in[0], in[1], in[2], 1, 1)); },
                                      {x, w, b}));
        auto w4 = random_tensor({2, 2, 4, 4}, rng);
        record("conv", gradient_error([](const auto& in) { return weighted_sum(conv2d(in[0], in[1], Tensor(), 2, 1)); },
                                      {x, w4}));

        auto xn = random_tensor({2, 3, 4, 4}, rng);
        record("instance_norm", gradient_error([](const auto& in) { return weighted_sum(normalize_instance(in[0])); },
                                               {xn}));
        record("batch_norm", gradient_error([](const auto& in) { return weighted_sum(normalize_batch(in[0])); },
                                            {xn}));

        ParameterStore store;
        SIModule si(store, "si", 2, 3, NormKind::Instance, rng);
        auto onehot = layout_onehot_at(random_layout(5, 5, rng, 4), 5);
        auto xs = random_tensor({1, 2, 5, 5}, rng);
        std::vector<Tensor> inputs{xs};
        for (auto* p : store.all()) inputs.push_back(p->value);
        record("si_module", gradient_error(
                                [&](const auto& in) { return weighted_sum(si.forward(in[0], onehot)); }, inputs));

        auto target = random_tensor({1, 8, 8}, rng, 0, 1, false);
        auto fake = random_tensor({1, 8, 8}, rng, 0, 1);
        auto logits = random_tensor({1, 1, 3, 3}, rng, -2, 2);
        record("adversarial_d", gradient_error(
                                    [](const auto& in) {
                                        return discriminator_loss(in[0], in[1], GanMode::SigmoidCrossEntropy);
                                    },
                                    {logits, random_tensor({1, 1, 3, 3}, rng, -2, 2)}));
        record("adversarial_g", gradient_error(
                                    [](const auto& in) { return generator_loss(in[0], GanMode::SigmoidCrossEntropy); },
                                    {logits}));
        auto src = random_tensor({1, 32, 32}, rng, 0, 1, false);
        auto sal = random_tensor({1, 1, 32, 32}, rng, 0, 1, false);
        auto big_fake = random_tensor({1, 32, 32}, rng, 0, 1);
        record("adversarial_g_through_d", gradient_error(
                                              [&](const auto& in) {
                                                  return generator_loss(disc.forward(src, sal, in[0]),
                                                                        GanMode::SigmoidCrossEntropy);
                                              },
                                              {big_fake}));
        record("content", gradient_error([&](const auto& in) { return content_l1(target, in[0]); }, {fake}));
        record("perceptual", gradient_error([&](const auto& in) { return perceptual(ext, target, in[0]); }, {fake}));
        record("parsing_bce", gradient_error([&](const auto& in) { return bce_parsing(parser, target, in[0]); },
                                             {fake}));

        auto layout = random_layout(8, 8, rng, 6);
        const auto mode = i % 2 ? VarianceMode::Masked : VarianceMode::Literal;
        auto gt = build_graphs(random_tensor({2, 8, 8}, rng, 0, 1, false), layout, mode);
        auto ff = random_tensor({2, 8, 8}, rng, 0, 1);
        record("iag", gradient_error([&](const auto& in) { return iag_loss(gt.intra, build_graphs(in[0], layout, mode).intra); },
                                     {ff}));
        record("itg", gradient_error([&](const auto& in) { return itg_loss(gt.inter, build_graphs(in[0], layout, mode).inter); },
                                     {ff}));
        record("graph_nodes", gradient_error(
                                  [&](const auto& in) {
                                      auto n = compute_nodes(in[0], layout, mode);
                                      return add(weighted_sum(n.mu, 3), weighted_sum(n.nu, 4));
                                  },
                                  {ff}));

        auto real16 = random_tensor({1, 16, 16}, rng, 0, 1, false);
        auto fake16 = random_tensor({1, 16, 16}, rng, 0, 1);
        auto sal16 = random_tensor({1, 1, 16, 16}, rng, 0, 1, false);
        auto layout16 = random_layout(16, 16, rng);
        record("ict", gradient_error(
                          [&](const auto& in) {
                              return ict_loss(frozen, real16, in[0], sal16, layout16, {0, 1, 2, 3, 4});
                          },
                          {fake16}));
    }

    Outcome o;
    double max_err = 0.0;
    std::string worst_name;
    for (const auto& [name, err] : worst) {
        if (err >= kTol) o.pass = false;
        if (err >= max_err) {
            max_err = err;
            worst_name = name;
        }
    }
    const double secs = seconds_since(t0);
    if (secs >= 60.0) o.pass = false;
    o.detail = std::to_string(worst.size()) + " operations x " + std::to_string(kInstances) +
               " instances, worst rel err " + fmt("%.2e", max_err) + " (" + worst_name + "), " + fmt("%.1f", secs) +
               " s";
    return o;
}

// 2. Graph path against brute-force loops.
Outcome graph_oracle_suite() {
    std::mt19937_64 rng(202);
    double worst = 0.0;
    int with_empty = 0;
    for (int trial = 0; trial < 50; ++trial) {
        // Every other instance draws from a reduced class set, leaving classes empty.
        const std::size_t classes = trial % 2 ? 3 + static_cast<std::size_t>(trial % 7) : 12;
        const auto layout = random_layout(8, 8, rng, classes);
        const auto mode = trial % 4 < 2 ? VarianceMode::Literal : VarianceMode::Masked;
        auto ft = random_tensor({3, 8, 8}, rng, -1, 1, false);
        auto ff = random_tensor({3, 8, 8}, rng, -1, 1, false);

        const auto nt = compute_nodes(ft, layout, mode);
        const auto rt = oracle_nodes(channels_of(ft), layout, mode);
        const auto rf = oracle_nodes(channels_of(ff), layout, mode);
        bool empty = false;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
            if (nt.present[c] != rt.present[c]) return {false, "presence flags differ in trial " + std::to_string(trial)};
            empty = empty || !rt.present[c];
            for (std::size_t k = 0; k < 3; ++k) {
                worst = std::max(worst, std::abs(nt.mu.at(c * 3 + k) - rt.mu[c][k]));
                worst = std::max(worst, std::abs(nt.nu.at(c * 3 + k) - rt.nu[c][k]));
            }
        }
        with_empty += empty;

        const auto it = intra_graph(ft, nt);
        const auto ot = oracle_intra(channels_of(ft), rt);
        const auto et = inter_graph(nt);
        const auto oet = oracle_inter(rt);
        for (std::size_t a = 0; a < kNumClasses; ++a) {
            worst = std::max(worst, std::abs(it.c1.at(a) - ot[0][a]));
            worst = std::max(worst, std::abs(it.c2.at(a) - ot[1][a]));
            for (std::size_t b = 0; b < kNumClasses; ++b) {
                worst = std::max(worst, std::abs(et.e1.at(a * 12 + b) - oet[0][a][b]));
                worst = std::max(worst, std::abs(et.e2.at(a * 12 + b) - oet[1][a][b]));
            }
        }
        const auto gt = build_graphs(ft, layout, mode);
        const auto gf = build_graphs(ff, layout, mode);
        const auto of = oracle_intra(channels_of(ff), rf);
        worst = std::max(worst, std::abs(iag_loss(gt.intra, gf.intra).item() - oracle_iag(ot, of)));
        worst = std::max(worst, std::abs(itg_loss(gt.inter, gf.inter).item() - oracle_itg(oet, oracle_inter(rf))));
    }
    Outcome o;
    o.pass = worst <= 1e-10 && with_empty >= 10;
    o.detail = "50 instances, max abs err " + fmt("%.2e", worst) + ", " + std::to_string(with_empty) +
               " with empty classes";
    return o;
}

GrayImage random_gray(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GrayImage g{n, n, std::vector<double>(n * n)};
    for (auto& v : g.pixels) v = u(rng);
    return g;
}

// 3. Metric identities, the 1-D Frechet closed form and noise response.
Outcome metric_identities() {
    std::mt19937_64 rng(303);
    double ssim_dev = 0.0, fsim_dev = 0.0, frechet_self = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto x = random_gray(32, rng);
        ssim_dev = std::max(ssim_dev, std::abs(ssim(x, x) - 1.0));
        fsim_dev = std::max(fsim_dev, std::abs(fsim(x, x) - 1.0));
        Eigen::MatrixXd a(16, 6);
        std::normal_distribution<double> n(0.0, 1.0);
        for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = n(rng);
        frechet_self = std::max(frechet_self, std::abs(frechet_distance(a, a)));
    }

    // N(0,1) vs N(3,1) from population statistics of {-1, 1} and {2, 4}.
    Eigen::MatrixXd pa(2, 1), pb(2, 1);
    pa << -1, 1;
    pb << 2, 4;
    auto population = [](const Eigen::MatrixXd& m, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
        mean = m.colwise().mean().transpose();
        const Eigen::MatrixXd c = m.rowwise() - mean.transpose();
        cov = c.transpose() * c / static_cast<double>(m.rows());
    };
    Eigen::VectorXd ma, mb;
    Eigen::MatrixXd ca, cb;
    population(pa, ma, ca);
    population(pb, mb, cb);
    const double f1d = frechet_from_stats(ma, ca, mb, cb);

    // Expected similarity over 20 noise seeds against a rendered sketch.
    const auto base = to_gray(generate_sample(0, DatagenOptions{}).sketch);
    const std::array<double, 3> sigmas{0.01, 0.05, 0.1};
    std::array<double, 3> ssim_mean{}, fsim_mean{};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 nrng(seed);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<double> noise(base.pixels.size());
        for (auto& v : noise) v = n(nrng);
        for (std::size_t s = 0; s < sigmas.size(); ++s) {
            GrayImage noisy = base;
            for (std::size_t i = 0; i < noise.size(); ++i) noisy.pixels[i] += sigmas[s] * noise[i];
            ssim_mean[s] += ssim(base, noisy) / 20.0;
            fsim_mean[s] += fsim(base, noisy) / 20.0;
        }
    }
    const bool decreasing = ssim_mean[0] > ssim_mean[1] && ssim_mean[1] > ssim_mean[2] &&
                            fsim_mean[0] > fsim_mean[1] && fsim_mean[1] > fsim_mean[2];

    Outcome o;
    o.pass = ssim_dev <= 1e-12 && fsim_dev <= 1e-12 && frechet_self <= 1e-8 && std::abs(f1d - 9.0) <= 1e-6 &&
             decreasing;
    o.detail = "|ssim(x,x)-1| " + fmt("%.1e", ssim_dev) + ", |fsim(x,x)-1| " + fmt("%.1e", fsim_dev) +
               ", frechet(A,A) " + fmt("%.1e", frechet_self) + ", 1-D frechet " + fmt("%.9f", f1d) +
               ", mean ssim " + fmt("%.4f", ssim_mean[0]) + ">" + fmt("%.4f", ssim_mean[1]) + ">" +
               fmt("%.4f", ssim_mean[2]) + ", mean fsim " + fmt("%.4f", fsim_mean[0]) + ">" +
               fmt("%.4f", fsim_mean[1]) + ">" + fmt("%.4f", fsim_mean[2]);
    return o;
}

// 4. Loss identities and the weighted objective.
Outcome loss_identities() {
    std::mt19937_64 rng(404);
    double zero_dev = 0.0;
    FeatureExtractor ext(1, 1001);
    Generator frozen(small_generator(1, 3, 4, 32));
    for (int i = 0; i < 5; ++i) {
        auto x = random_tensor({1, 32, 32}, rng, 0, 1, false);
        auto sal = random_tensor({1, 1, 32, 32}, rng, 0, 1, false);
        auto layout = random_layout(32, 32, rng);
        auto g = build_graphs(x, layout);
        for (double v : {content_l1(x, x).item(), perceptual(ext, x, x).item(), iag_loss(g.intra, g.intra).item(),
                         itg_loss(g.inter, g.inter).item(),
                         ict_loss(frozen, x, x, sal, layout, {0, 1, 2, 3, 4}).item()}) {
            zero_dev = std::max(zero_dev, std::abs(v));
        }
    }

    auto z = Tensor::zeros({1, 1, 6, 6});
    const double d_err = std::abs(discriminator_loss(z, z, GanMode::SigmoidCrossEntropy).item() - 2 * std::log(2.0));
    const double g_err = std::abs(generator_loss(z, GanMode::SigmoidCrossEntropy).item() - std::log(2.0));

    const LossWeights w;
    double sum_err = 0.0;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        double v[7];
        for (double& x : v) x = u(rng);
        LossParts p;
        Tensor* slots[7] = {&p.gan, &p.content, &p.perceptual, &p.bce, &p.iag, &p.itg, &p.ict};
        for (int k = 0; k < 7; ++k) *slots[k] = Tensor::full({1}, v[k]);
        const double hand = v[0] + 100 * v[1] + 10 * v[2] + 15 * v[3] + 100 * v[4] + 100 * v[5] + 5 * v[6];
        sum_err = std::max(sum_err, std::abs(total_objective(p, w).item() - hand));
    }

    Outcome o;
    o.pass = zero_dev == 0.0 && d_err <= 1e-12 && g_err <= 1e-12 && sum_err <= 1e-12;
    o.detail = "max loss at fake==target " + fmt("%.1e", zero_dev) + ", D/G zero-logit err " + fmt("%.1e", d_err) +
               "/" + fmt("%.1e", g_err) + ", weighted-sum err " + fmt("%.1e", sum_err);
    return o;
}

// 5. Stage-0 photo->sketch training at desk scale.
Outcome desk_training() {
    const auto t0 = Clock::now();
    TrainConfig config;  // 40 epochs, 64x64, seed 7
    DatagenOptions opts;
    std::vector<PairedSample> samples;
    for (std::size_t i = 0; i < 40; ++i) samples.push_back(generate_sample(i, opts));
    const auto data = split_corpus(std::move(samples), 8);
    const LossNetworks nets(config);
    Outcome o;
    try {
        const auto r = train_stage(config, nets, Direction::PhotoToSketch, 0, data, nullptr, scratch("desk"));
        const double first = r.epoch_total.front(), last = r.epoch_total.back();
        bool finite = true;
        for (double v : r.epoch_total) finite = finite && std::isfinite(v);
        const double secs = seconds_since(t0);
        const double reduction = 1.0 - last / first;
        o.pass = finite && reduction >= 0.5 && secs <= 15 * 60;
        o.detail = std::to_string(data.train.size()) + " train samples, epoch 1 mean " + fmt("%.6g", first) +
                   ", epoch " + std::to_string(r.epoch_total.size()) + " mean " + fmt("%.6g", last) + ", reduction " +
                   fmt("%.2f", 100 * reduction) + "%, " + fmt("%.0f", secs) + " s";
    } catch (const NumericError& e) {
        o = {false, std::string("non-finite loss: ") + e.what()};
    }
    return o;
}

// 6. Iterative cycle training with T = 4.
Outcome iterative_conformance() {
    const auto t0 = Clock::now();
    // Desk architecture at 64x64 on a short schedule: 8 train samples, 8 epochs per stage.
    TrainConfig config;
    config.epochs = 8;
    config.iterations = 4;
    DatagenOptions opts;
    std::vector<PairedSample> samples;
    for (std::size_t i = 0; i < 10; ++i) samples.push_back(generate_sample(i, opts));
    const auto data = split_corpus(std::move(samples), 2);
    const auto run_dir = scratch("iterative");
    const auto results = run_iterative(config, data, run_dir);

    std::size_t per_dir[2] = {0, 0};
    bool frozen_ok = true, ict_ok = true, files_ok = true;
    std::string ict_trace;
    for (const auto& r : results) {
        ++per_dir[r.checkpoint.direction == Direction::PhotoToSketch ? 0 : 1];
        files_ok = files_ok && fs::exists(r.checkpoint.dir / "model.bin");
        if (r.checkpoint.stage == 0) continue;
        frozen_ok = frozen_ok && r.frozen_bit_identical && !r.frozen_before.empty() &&
                    r.frozen_before == r.frozen_after;
        for (double v : r.epoch_ict) ict_ok = ict_ok && std::isfinite(v) && v > 0.0;
        ict_ok = ict_ok && r.epoch_ict.front() > r.epoch_ict.back();
        ict_trace += " " + std::to_string(r.checkpoint.stage) + direction_tag(r.checkpoint.direction) + ":" +
                     fmt("%.4g", r.epoch_ict.front()) + "->" + fmt("%.4g", r.epoch_ict.back());
    }
    Outcome o;
    o.pass = per_dir[0] == 5 && per_dir[1] == 5 && frozen_ok && ict_ok && files_ok && fs::exists(run_dir / "run.json");
    o.detail = "checkpoints k=" + std::to_string(per_dir[0]) + " o=" + std::to_string(per_dir[1]) +
               ", frozen weights " + (frozen_ok ? "bit-identical" : "CHANGED") + ", ICT first->last" + ict_trace +
               ", " + fmt("%.0f", seconds_since(t0)) + " s";
    return o;
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

// 7. Two CLI pipelines with identical seeds.
Outcome determinism() {
    const std::string cli = SGS_CLI_PATH;
    const auto root = scratch("determinism");
    std::vector<fs::path> files[2];
    for (int rep = 0; rep < 2; ++rep) {
        const auto dir = root / ("rep" + std::to_string(rep));
        const std::string d = dir.string();
        const std::string steps[] = {
            cli + " datagen --n 10 --size 32 --seed 7 --out " + d + "/corpus",
            cli + " train --data " + d + "/corpus/manifest.jsonl --epochs 6 --image-size 32 --depth 4" +
                " --direction k --val-count 2 --seed 7 --out " + d + "/runs --run-id r",
            cli + " eval --checkpoint " + d + "/runs/r/stage0_k --data " + d +
                "/corpus/manifest.jsonl --val-count 2 --out " + d + "/eval",
        };
        for (const auto& s : steps) {
            if (int rc = run(s); rc != 0) return {false, "command failed (" + std::to_string(rc) + "): " + s};
        }
        files[rep] = {dir / "runs/r/stage0_k/losses.csv", dir / "eval/val_metrics.json"};
    }
    Outcome o;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto a = slurp(files[0][i]), b = slurp(files[1][i]);
        if (a.empty() || a != b) {
            o.pass = false;
            o.detail += files[0][i].filename().string() + " differs; ";
        }
    }
    if (o.pass) {
        o.detail = "datagen -> train 6 epochs -> eval twice: losses.csv (" +
                   std::to_string(slurp(files[0][0]).size()) + " bytes) and val_metrics.json byte-identical";
    }
    return o;
}

// 8. Depth-7 shape contract at 256x256.
Outcome shape_contract() {
    std::mt19937_64 rng(808);
    const auto layout = random_layout(256, 256, rng);
    const auto sal = random_tensor({1, 1, 256, 256}, rng, 0, 1, false);
    const std::vector<std::size_t> expected{4, 8, 16, 32, 64, 128, 256};
    Outcome o;
    for (auto [in, out] : {std::pair<std::size_t, std::size_t>{3, 1}, {1, 3}}) {
        auto c = small_generator(in, out, 7, 256);
        Generator g(c);
        GeneratorOutput y;
        {
            NoGradGuard guard;
            y = g.forward(random_tensor({in, 256, 256}, rng, 0, 1, false), sal, layout);
        }
        bool ok = y.bottleneck_size == 2 && y.taps.front().dim(2) == 2 && y.taps.front().dim(3) == 2 &&
                  y.image.shape() == Shape{1, out, 256, 256} && y.layout_sizes.size() == 7 && y.taps.size() == 8;
        for (std::size_t i = 0; ok && i < 7; ++i) {
            ok = y.layout_sizes[i] == std::pair{expected[i], expected[i]} && y.taps[i + 1].dim(2) == expected[i];
            // The layout handed to each block is the nearest-neighbour downsample.
            const auto oh = layout_onehot_at(layout, expected[i]);
            const auto ref = one_hot(downsample_layout(layout, 256 / expected[i]));
            for (std::size_t k = 0; ok && k < ref.numel(); ++k) ok = oh.at(k) == ref.at(k);
        }
        if (!ok) o.pass = false;
    }
    o.detail = "depth 7 at 256: bottleneck 2x2, output 256x256, decoder layouts 4..256 (both directions)";
    if (!o.pass) o.detail = "shape contract violated";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient suite", gradient_suite},
        {"graph oracle suite", graph_oracle_suite},
        {"metric identities", metric_identities},
        {"loss identities", loss_identities},
        {"desk-scale training", desk_training},
        {"iterative cycle training", iterative_conformance},
        {"pipeline determinism", determinism},
        {"architecture shape contract", shape_contract},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
