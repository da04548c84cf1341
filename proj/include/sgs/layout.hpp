#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sgs/tensor.hpp"

namespace sgs {

inline constexpr std::size_t kNumClasses = 12;

enum class FaceClass : std::uint8_t {
    Eyes = 0,
    Eyebrows = 1,
    Ears = 2,
    Glasses = 3,
    Lips = 4,
    InnerMouth = 5,
    Hair = 6,
    Nose = 7,
    Skin = 8,
    Neck = 9,
    Cloth = 10,
    Background = 11,
};

std::string_view class_name(std::size_t index);

/// Per-pixel class indices in 0..11.
class SemanticLayout {
public:
    SemanticLayout() = default;
    SemanticLayout(std::size_t height, std::size_t width, std::vector<std::uint8_t> classes);
    static SemanticLayout uniform(std::size_t height, std::size_t width, FaceClass cls);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::uint8_t at(std::size_t y, std::size_t x) const { return classes_[y * width_ + x]; }
    const std::vector<std::uint8_t>& classes() const { return classes_; }

    std::array<std::size_t, kNumClasses> class_counts() const;

    bool operator==(const SemanticLayout&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> classes_;
};

/// Scalar map with values clamped into [0, 1].
class SaliencyMap {
public:
    SaliencyMap() = default;
    SaliencyMap(std::size_t height, std::size_t width, std::vector<double> values);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    const std::vector<double>& values() const { return values_; }

    /// [1, 1, H, W] tensor.
    Tensor to_tensor() const;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

/// One identity: photo, sketch and the per-side saliency maps and layouts.
struct PairedSample {
    std::string id;
    Tensor photo;   // [3, H, W] in [0, 1]
    Tensor sketch;  // [1, H, W] in [0, 1]
    SaliencyMap saliency_photo;
    SaliencyMap saliency_sketch;
    SemanticLayout layout_photo;
    SemanticLayout layout_sketch;

    std::size_t size() const { return layout_photo.height(); }
};

/// Checks the cross-field invariants; throws DataError naming the problem.
void validate_sample(const PairedSample& sample);

/// [12, H, W] indicator tensor.
Tensor one_hot(const SemanticLayout& layout);

/// Top-left nearest-neighbour subsampling by `factor`.
SemanticLayout downsample_layout(const SemanticLayout& layout, std::size_t factor);

// Netpbm binary images. Values are raw bytes (0..maxval).
struct PnmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;  // 1 for P5, 3 for P6
    unsigned maxval = 255;
    std::vector<std::uint8_t> pixels;
};

PnmImage read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const PnmImage& image);

/// Tensor [C, H, W] (values in [0, 1]) to/from 8-bit Netpbm.
PnmImage image_to_pnm(const Tensor& image);
Tensor pnm_to_image(const PnmImage& pnm);

SemanticLayout read_layout(const std::filesystem::path& path);
void write_layout(const std::filesystem::path& path, const SemanticLayout& layout);
SaliencyMap read_saliency(const std::filesystem::path& path);
void write_saliency(const std::filesystem::path& path, const SaliencyMap& map);

/// One line of the corpus manifest; paths relative to the manifest directory.
struct ManifestEntry {
    std::string id;
    std::string photo;
    std::string sketch;
    std::string saliency_photo;
    std::string saliency_sketch;
    std::string layout_photo;
    std::string layout_sketch;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

PairedSample load_sample(const std::filesystem::path& root, const ManifestEntry& entry);
/// Writes the sample files named by `entry` under `root`.
void save_sample(const std::filesystem::path& root, const ManifestEntry& entry, const PairedSample& sample);

/// Loads every manifest entry relative to the manifest's directory.
std::vector<PairedSample> load_corpus(const std::filesystem::path& manifest);

}  // namespace sgs
