#include "sgs/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "sgs/error.hpp"
#include "sgs/parallel.hpp"

namespace sgs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Portable generator: the standard distributions are implementation-defined,
// these are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() { return state_ = splitmix64(state_); }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() {
        const double u1 = std::max(uniform(), 1e-300), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    std::uint64_t state_;
};

std::string sample_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%04zu", index);
    return buf;
}

// Grey level of each class in the sketch rendering.
constexpr std::array<double, kNumClasses> kSketchTone = {0.15, 0.30, 0.92, 0.10, 0.55, 0.20,
                                                         0.40, 0.86, 0.97, 0.93, 0.75, 1.00};

SaliencyMap saliency_from_layout(const SemanticLayout& layout) {
    const auto h = static_cast<std::ptrdiff_t>(layout.height()), w = static_cast<std::ptrdiff_t>(layout.width());
    constexpr std::ptrdiff_t r = 2;
    std::vector<double> out(static_cast<std::size_t>(h * w));
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double s = 0.0, n = 0.0;
            for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
                for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
                    const auto yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    n += 1.0;
                    s += layout.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) !=
                                 static_cast<std::uint8_t>(FaceClass::Background)
                             ? 1.0
                             : 0.0;
                }
            }
            out[static_cast<std::size_t>(y * w + x)] = s / n;
        }
    }
    return SaliencyMap(layout.height(), layout.width(), std::move(out));
}

}  // namespace

CorpusMode parse_corpus_mode(const std::string& text) {
    if (text == "aligned") return CorpusMode::Aligned;
    if (text == "deformed") return CorpusMode::Deformed;
    throw ConfigError("mode must be 'aligned' or 'deformed', got '" + text + "'");
}

std::string to_string(CorpusMode mode) { return mode == CorpusMode::Aligned ? "aligned" : "deformed"; }

bool Ellipse::contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double c = std::cos(rotation), s = std::sin(rotation);
    const double u = (c * dx + s * dy) / ax, v = (-s * dx + c * dy) / ay;
    return u * u + v * v <= 1.0;
}

FaceClass SceneSpec::classify(double x, double y) const {
    if (glasses) {
        for (std::size_t k = 0; k < 2; ++k) {
            if (glasses_outer[k].contains(x, y) && !glasses_inner[k].contains(x, y)) return FaceClass::Glasses;
        }
        const double bridge_y = 0.5 * (glasses_outer[0].cy + glasses_outer[1].cy);
        const double left = std::min(glasses_outer[0].cx, glasses_outer[1].cx) + glasses_inner[0].ax;
        const double right = std::max(glasses_outer[0].cx, glasses_outer[1].cx) - glasses_inner[1].ax;
        if (x > left && x < right && std::abs(y - bridge_y) < 0.012) return FaceClass::Glasses;
    }
    for (const auto& e : eyes)
        if (e.contains(x, y)) return FaceClass::Eyes;
    for (const auto& e : eyebrows)
        if (e.contains(x, y)) return FaceClass::Eyebrows;
    if (inner_mouth.contains(x, y)) return FaceClass::InnerMouth;
    if (lips.contains(x, y)) return FaceClass::Lips;
    if (nose.contains(x, y)) return FaceClass::Nose;
    for (const auto& e : ears)
        if (e.contains(x, y)) return FaceClass::Ears;
    if (hair.contains(x, y) && y < hairline) return FaceClass::Hair;
    if (face.contains(x, y)) return FaceClass::Skin;
    if (neck.contains(x, y)) return FaceClass::Neck;
    if (cloth.contains(x, y)) return FaceClass::Cloth;
    return FaceClass::Background;
}

std::uint64_t sample_seed(std::uint64_t corpus_seed, std::size_t index) {
    return splitmix64(corpus_seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

SceneSpec make_scene(std::uint64_t seed, const DatagenOptions& options) {
    Rng rng(seed);
    SceneSpec s;
    s.seed = seed;
    const double fcx = 0.5 + rng.uniform(-0.03, 0.03), fcy = 0.47 + rng.uniform(-0.02, 0.02);
    const double fax = 0.25 + rng.uniform(-0.02, 0.02), fay = 0.32 + rng.uniform(-0.02, 0.02);
    s.face = {fcx, fcy, fax, fay, rng.uniform(-0.05, 0.05)};
    s.hair = {fcx, fcy - 0.07, fax + 0.045, fay * 0.8, 0.0};
    s.hairline = fcy - fay * 0.45 + rng.uniform(-0.03, 0.03);
    s.neck = {fcx, fcy + fay + 0.06, 0.11, 0.16, 0.0};
    s.cloth = {0.5, 1.1, 0.5, 0.24, 0.0};
    const double eye_y = fcy - 0.05 + rng.uniform(-0.015, 0.015);
    const double eye_dx = 0.1 + rng.uniform(-0.01, 0.01);
    const double eye_ax = 0.05 + rng.uniform(-0.008, 0.008);
    const double brow_y = eye_y - 0.065 + rng.uniform(-0.01, 0.01);
    const double brow_tilt = rng.uniform(0.0, 0.2);
    for (std::size_t k = 0; k < 2; ++k) {
        const double side = k == 0 ? -1.0 : 1.0;
        s.ears[k] = {fcx + side * (fax + 0.012), fcy + 0.01, 0.035, 0.065, 0.0};
        s.eyes[k] = {fcx + side * eye_dx, eye_y, eye_ax, 0.026, 0.0};
        s.eyebrows[k] = {fcx + side * eye_dx, brow_y, 0.07, 0.02, -side * brow_tilt};
        s.glasses_outer[k] = {fcx + side * eye_dx, eye_y, eye_ax + 0.035, 0.06, 0.0};
        s.glasses_inner[k] = {fcx + side * eye_dx, eye_y, eye_ax + 0.018, 0.043, 0.0};
    }
    s.nose = {fcx, fcy + 0.07, 0.04 + rng.uniform(-0.005, 0.005), 0.08, 0.0};
    const double mouth_y = fcy + 0.2 + rng.uniform(-0.01, 0.01);
    s.lips = {fcx, mouth_y, 0.11 + rng.uniform(-0.01, 0.01), 0.048, 0.0};
    s.inner_mouth = {fcx, mouth_y, 0.075, 0.022, 0.0};
    s.glasses = rng.uniform() < options.glasses_fraction;

    const double skin = rng.uniform(0.55, 0.95);
    const double hair_level = rng.uniform(0.05, 0.45);
    auto jitter = [&](double v) { return std::clamp(v + rng.uniform(-0.05, 0.05), 0.0, 1.0); };
    s.palette[0] = {0.12, 0.1, 0.1};
    s.palette[1] = {hair_level * 0.8, hair_level * 0.7, hair_level * 0.6};
    s.palette[2] = {skin * 0.95, skin * 0.78, skin * 0.66};
    s.palette[3] = {0.05, 0.05, 0.08};
    s.palette[4] = {jitter(0.75), jitter(0.32), jitter(0.35)};
    s.palette[5] = {0.3, 0.08, 0.1};
    s.palette[6] = {hair_level, hair_level * 0.85, hair_level * 0.7};
    s.palette[7] = {skin * 0.97, skin * 0.8, skin * 0.68};
    s.palette[8] = {skin, skin * 0.82, skin * 0.7};
    s.palette[9] = {skin * 0.9, skin * 0.74, skin * 0.63};
    s.palette[10] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    s.palette[11] = {rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0)};
    s.light_gain = rng.uniform(0.1, 0.4);
    s.light_angle = rng.uniform(0.0, kTwoPi);
    s.hatch_angle = rng.uniform(0.3, 1.2);
    s.hatch_period = rng.uniform(0.04, 0.07);

    if (options.mode == CorpusMode::Deformed) {
        const double px = 1.0 / static_cast<double>(options.size);
        // At most 4 px at 64 x 64, scaled with the canvas.
        const double amp = 4.0 * 64.0 / static_cast<double>(options.size) * px;
        s.warp_amp_x = amp * rng.uniform(0.5, 1.0);
        s.warp_amp_y = amp * rng.uniform(0.5, 1.0);
        s.warp_fx = rng.uniform(0.5, 1.5);
        s.warp_fy = rng.uniform(0.5, 1.5);
        s.warp_px = rng.uniform();
        s.warp_py = rng.uniform();
    }
    return s;
}

PairedSample generate_sample(std::size_t index, const DatagenOptions& options) {
    const std::size_t n = options.size;
    if (n != 32 && n != 64 && n != 128 && n != 256) {
        throw ConfigError("size must be one of 32, 64, 128, 256, got " + std::to_string(n));
    }
    const auto scene = make_scene(sample_seed(options.seed, index), options);
    Rng noise(scene.seed ^ 0xA5A5A5A5A5A5A5A5ull);
    const double inv = 1.0 / static_cast<double>(n);

    std::vector<std::uint8_t> photo_cls(n * n), sketch_cls(n * n);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const double px = (static_cast<double>(x) + 0.5) * inv, py = (static_cast<double>(y) + 0.5) * inv;
            photo_cls[y * n + x] = static_cast<std::uint8_t>(scene.classify(px, py));
            const double wx = px + scene.warp_amp_x * std::sin(kTwoPi * (scene.warp_fy * py + scene.warp_py));
            const double wy = py + scene.warp_amp_y * std::sin(kTwoPi * (scene.warp_fx * px + scene.warp_px));
            sketch_cls[y * n + x] = static_cast<std::uint8_t>(scene.classify(wx, wy));
        }
    }

    PairedSample s;
    s.id = sample_id(index);
    s.layout_photo = SemanticLayout(n, n, std::move(photo_cls));
    s.layout_sketch = SemanticLayout(n, n, std::move(sketch_cls));

    // Photo: flat palette, face shading, a linear lighting ramp and sensor noise.
    std::vector<double> photo(3 * n * n);
    const double lc = std::cos(scene.light_angle), ls = std::sin(scene.light_angle);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const double px = (static_cast<double>(x) + 0.5) * inv, py = (static_cast<double>(y) + 0.5) * inv;
            const auto cls = s.layout_photo.at(y, x);
            const double dx = (px - scene.face.cx) / scene.face.ax, dy = (py - scene.face.cy) / scene.face.ay;
            const double shade = cls == static_cast<std::uint8_t>(FaceClass::Background)
                                     ? 1.0
                                     : 1.0 - 0.12 * std::min(dx * dx + dy * dy, 1.5);
            const double light = 1.0 + scene.light_gain * ((px - 0.5) * lc + (py - 0.5) * ls);
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = scene.palette[cls][c] * shade * light + scene.noise_sigma * noise.normal();
                photo[c * n * n + y * n + x] = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    // Sketch: per-class tones with hatched hair, darkened along tone edges.
    std::vector<double> tone(n * n);
    const double hc = std::cos(scene.hatch_angle), hs = std::sin(scene.hatch_angle);
    for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
            const auto cls = s.layout_sketch.at(y, x);
            double t = kSketchTone[cls];
            if (cls == static_cast<std::uint8_t>(FaceClass::Hair)) {
                const double px = static_cast<double>(x) * inv, py = static_cast<double>(y) * inv;
                t += 0.15 * std::sin(kTwoPi * (px * hc + py * hs) / scene.hatch_period);
            }
            tone[y * n + x] = t;
        }
    }
    std::vector<double> sketch(n * n);
    const auto ni = static_cast<std::ptrdiff_t>(n);
    auto tone_at = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
        y = std::clamp<std::ptrdiff_t>(y, 0, ni - 1);
        x = std::clamp<std::ptrdiff_t>(x, 0, ni - 1);
        return tone[static_cast<std::size_t>(y * ni + x)];
    };
    for (std::ptrdiff_t y = 0; y < ni; ++y) {
        for (std::ptrdiff_t x = 0; x < ni; ++x) {
            const double gx = (tone_at(y - 1, x + 1) + 2 * tone_at(y, x + 1) + tone_at(y + 1, x + 1)) -
                              (tone_at(y - 1, x - 1) + 2 * tone_at(y, x - 1) + tone_at(y + 1, x - 1));
            const double gy = (tone_at(y + 1, x - 1) + 2 * tone_at(y + 1, x) + tone_at(y + 1, x + 1)) -
                              (tone_at(y - 1, x - 1) + 2 * tone_at(y - 1, x) + tone_at(y - 1, x + 1));
            const double edge = std::sqrt(gx * gx + gy * gy) / 4.0;
            sketch[static_cast<std::size_t>(y * ni + x)] = std::clamp(tone_at(y, x) - 1.2 * edge, 0.0, 1.0);
        }
    }

    // Quantise through 8 bits so the in-memory sample equals its on-disk form.
    auto quantise = [](std::vector<double>& v) {
        for (auto& x : v) x = std::round(x * 255.0) / 255.0;
    };
    quantise(photo);
    quantise(sketch);
    s.photo = Tensor(Shape{3, n, n}, std::move(photo));
    s.sketch = Tensor(Shape{1, n, n}, std::move(sketch));
    auto sal_p = saliency_from_layout(s.layout_photo);
    auto sal_s = saliency_from_layout(s.layout_sketch);
    auto quantised = [&](const SaliencyMap& m) {
        auto v = m.values();
        quantise(v);
        return SaliencyMap(n, n, std::move(v));
    };
    s.saliency_photo = quantised(sal_p);
    s.saliency_sketch = quantised(sal_s);
    return s;
}

std::filesystem::path generate_corpus(std::size_t n, const DatagenOptions& options,
                                      const std::filesystem::path& out_dir) {
    if (n == 0) throw ConfigError("n must be at least 1");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw DataError("cannot create output directory " + out_dir.string());
    }
    std::vector<ManifestEntry> entries(n);
    parallel_for(n, [&](std::size_t i) {
        auto sample = generate_sample(i, options);
        ManifestEntry e;
        e.id = sample.id;
        e.photo = sample.id + "_photo.ppm";
        e.sketch = sample.id + "_sketch.pgm";
        e.saliency_photo = sample.id + "_saliency_photo.pgm";
        e.saliency_sketch = sample.id + "_saliency_sketch.pgm";
        e.layout_photo = sample.id + "_layout_photo.pgm";
        e.layout_sketch = sample.id + "_layout_sketch.pgm";
        save_sample(out_dir, e, sample);
        entries[i] = std::move(e);
    });
    auto manifest = out_dir / "manifest.jsonl";
    write_manifest(manifest, entries);
    return manifest;
}

std::string CorpusStats::to_json() const {
    nlohmann::ordered_json j;
    j["samples"] = samples;
    nlohmann::ordered_json classes = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        classes[std::string(class_name(c))] = {{"pixel_fraction", pixel_fraction[c]}, {"presence", presence[c]}};
    }
    j["classes"] = classes;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [size, count] : size_histogram) hist[std::to_string(size)] = count;
    j["size_histogram"] = hist;
    j["errors"] = errors;
    return j.dump(2);
}

CorpusStats corpus_stats(const std::filesystem::path& manifest) {
    CorpusStats stats;
    auto entries = read_manifest(manifest);
    const auto root = manifest.parent_path();
    std::array<std::size_t, kNumClasses> pixels{};
    std::size_t total = 0;
    for (const auto& e : entries) {
        try {
            auto layout = read_layout(root / e.layout_photo);
            const auto counts = layout.class_counts();
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                pixels[c] += counts[c];
                if (counts[c]) ++stats.presence[c];
            }
            total += layout.height() * layout.width();
            ++stats.size_histogram[layout.height()];
            ++stats.samples;
        } catch (const Error& ex) {
            stats.errors.push_back(e.id + ": " + ex.what());
        }
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        stats.pixel_fraction[c] = total ? static_cast<double>(pixels[c]) / static_cast<double>(total) : 0.0;
    }
    return stats;
}

}  // namespace sgs
