#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sgs/layout.hpp"

namespace sgs {

enum class CorpusMode { Aligned, Deformed };

CorpusMode parse_corpus_mode(const std::string& text);
std::string to_string(CorpusMode mode);

struct Ellipse {
    double cx = 0, cy = 0;   // centre, canvas-normalised
    double ax = 0, ay = 0;   // semi-axes
    double rotation = 0;     // radians

    bool contains(double x, double y) const;
};

/// Geometry, palette and rendering parameters of one synthetic face.
struct SceneSpec {
    std::uint64_t seed = 0;
    Ellipse face, hair, neck, cloth, nose, lips, inner_mouth;
    std::array<Ellipse, 2> ears, eyebrows, eyes, glasses_outer, glasses_inner;
    double hairline = 0;
    bool glasses = false;
    std::array<std::array<double, 3>, kNumClasses> palette{};
    double light_gain = 0, light_angle = 0;
    double noise_sigma = 0.02;
    double hatch_angle = 0, hatch_period = 0.05;
    // Sketch-side warp: x += amp_x sin(2pi(fy y + py)), y += amp_y sin(2pi(fx x + px)).
    double warp_amp_x = 0, warp_amp_y = 0, warp_fx = 0, warp_fy = 0, warp_px = 0, warp_py = 0;

    /// Class at canvas-normalised point (x, y); the one rasterizer shared by
    /// photo, sketch and layouts.
    FaceClass classify(double x, double y) const;
};

struct DatagenOptions {
    std::size_t size = 64;
    std::uint64_t seed = 7;
    CorpusMode mode = CorpusMode::Aligned;
    double glasses_fraction = 0.5;
};

/// Per-sample seed derived from the corpus seed and the sample index.
std::uint64_t sample_seed(std::uint64_t corpus_seed, std::size_t index);

SceneSpec make_scene(std::uint64_t seed, const DatagenOptions& options);

/// Renders one paired sample in memory.
PairedSample generate_sample(std::size_t index, const DatagenOptions& options);

/// Writes `n` samples plus manifest.jsonl under `out_dir`; returns the manifest path.
std::filesystem::path generate_corpus(std::size_t n, const DatagenOptions& options,
                                      const std::filesystem::path& out_dir);

struct CorpusStats {
    std::size_t samples = 0;
    std::array<double, kNumClasses> pixel_fraction{};    // over all layout pixels
    std::array<std::size_t, kNumClasses> presence{};     // samples containing the class
    std::map<std::size_t, std::size_t> size_histogram;   // image side -> count
    std::vector<std::string> errors;                     // one line per unreadable entry

    std::string to_json() const;
};

/// Statistics over the photo-side layouts named by a manifest.
CorpusStats corpus_stats(const std::filesystem::path& manifest);

}  // namespace sgs
