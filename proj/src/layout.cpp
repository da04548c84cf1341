#include "sgs/layout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sgs/error.hpp"

namespace sgs {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "eyes", "eyebrows", "ears", "glasses", "lips", "inner-mouth",
    "hair", "nose", "skin", "neck", "cloth", "background"};

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

std::size_t header_number(std::istream& is, const std::filesystem::path& path, const char* field) {
    auto tok = header_token(is);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(ch); })) {
        throw DataError("malformed Netpbm header in " + path.string() + ": bad " + field + " '" + tok + "'");
    }
    return std::stoul(tok);
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::string_view class_name(std::size_t index) { return kClassNames.at(index); }

SemanticLayout::SemanticLayout(std::size_t height, std::size_t width, std::vector<std::uint8_t> classes)
    : height_(height), width_(width), classes_(std::move(classes)) {
    if (height == 0 || width == 0) throw DataError("layout dimensions must be positive");
    if (classes_.size() != height * width) {
        throw DataError("layout has " + std::to_string(classes_.size()) + " pixels, expected " +
                        std::to_string(height * width));
    }
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i] >= kNumClasses) {
            throw DataError("layout pixel (x=" + std::to_string(i % width) + ", y=" + std::to_string(i / width) +
                            ") has class " + std::to_string(classes_[i]) + ", valid range is 0..11");
        }
    }
}

SemanticLayout SemanticLayout::uniform(std::size_t height, std::size_t width, FaceClass cls) {
    return SemanticLayout(height, width, std::vector<std::uint8_t>(height * width, static_cast<std::uint8_t>(cls)));
}

std::array<std::size_t, kNumClasses> SemanticLayout::class_counts() const {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto c : classes_) ++counts[c];
    return counts;
}

SaliencyMap::SaliencyMap(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (values_.size() != height * width) throw DataError("saliency map size does not match its dimensions");
    for (auto& v : values_) {
        if (!std::isfinite(v)) throw DataError("saliency map contains a non-finite value");
        v = std::clamp(v, 0.0, 1.0);
    }
}

Tensor SaliencyMap::to_tensor() const { return Tensor(Shape{1, 1, height_, width_}, values_); }

void validate_sample(const PairedSample& s) {
    const auto h = s.layout_photo.height(), w = s.layout_photo.width();
    auto check = [&](std::size_t hh, std::size_t ww, const char* what) {
        if (hh != h || ww != w) {
            throw DataError("sample '" + s.id + "': " + what + " is " + std::to_string(ww) + "x" +
                            std::to_string(hh) + ", expected " + std::to_string(w) + "x" + std::to_string(h));
        }
    };
    if (h != w) throw DataError("sample '" + s.id + "': images must be square");
    if (!s.photo.defined() || s.photo.rank() != 3 || s.photo.dim(0) != 3) {
        throw DataError("sample '" + s.id + "': photo must have 3 channels");
    }
    if (!s.sketch.defined() || s.sketch.rank() != 3 || s.sketch.dim(0) != 1) {
        throw DataError("sample '" + s.id + "': sketch must have 1 channel");
    }
    check(s.photo.dim(1), s.photo.dim(2), "photo");
    check(s.sketch.dim(1), s.sketch.dim(2), "sketch");
    check(s.saliency_photo.height(), s.saliency_photo.width(), "saliency_photo");
    check(s.saliency_sketch.height(), s.saliency_sketch.width(), "saliency_sketch");
    check(s.layout_sketch.height(), s.layout_sketch.width(), "layout_sketch");
}

Tensor one_hot(const SemanticLayout& layout) {
    const std::size_t hw = layout.height() * layout.width();
    std::vector<double> data(kNumClasses * hw, 0.0);
    const auto& cls = layout.classes();
    for (std::size_t i = 0; i < hw; ++i) data[cls[i] * hw + i] = 1.0;
    return Tensor(Shape{kNumClasses, layout.height(), layout.width()}, std::move(data));
}

SemanticLayout downsample_layout(const SemanticLayout& layout, std::size_t factor) {
    if (factor == 0 || layout.height() % factor != 0 || layout.width() % factor != 0) {
        throw DataError("cannot downsample " + std::to_string(layout.width()) + "x" +
                        std::to_string(layout.height()) + " layout by factor " + std::to_string(factor));
    }
    const std::size_t h = layout.height() / factor, w = layout.width() / factor;
    std::vector<std::uint8_t> out(h * w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out[y * w + x] = layout.at(y * factor, x * factor);
    return SemanticLayout(h, w, std::move(out));
}

PnmImage read_pnm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open image " + path.string());
    auto magic = header_token(is);
    PnmImage img;
    if (magic == "P5") {
        img.channels = 1;
    } else if (magic == "P6") {
        img.channels = 3;
    } else {
        throw DataError("malformed Netpbm header in " + path.string() + ": magic '" + magic + "' is not P5/P6");
    }
    img.width = header_number(is, path, "width");
    img.height = header_number(is, path, "height");
    const auto maxval = header_number(is, path, "maxval");
    if (img.width == 0 || img.height == 0 || maxval == 0 || maxval > 255) {
        throw DataError("malformed Netpbm header in " + path.string() + ": unsupported dimensions or maxval");
    }
    img.maxval = static_cast<unsigned>(maxval);
    img.pixels.resize(img.width * img.height * img.channels);
    if (!is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()))) {
        throw DataError("truncated pixel data in " + path.string());
    }
    return img;
}

void write_pnm(const std::filesystem::path& path, const PnmImage& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write image " + path.string());
    os << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!os) throw DataError("failed writing image " + path.string());
}

PnmImage image_to_pnm(const Tensor& image) {
    if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
        throw DataError("image tensor must be [1,H,W] or [3,H,W], got " + shape_str(image.shape()));
    }
    PnmImage img;
    img.channels = image.dim(0);
    img.height = image.dim(1);
    img.width = image.dim(2);
    const std::size_t hw = img.height * img.width;
    img.pixels.resize(hw * img.channels);
    for (std::size_t i = 0; i < hw; ++i)
        for (std::size_t c = 0; c < img.channels; ++c) img.pixels[i * img.channels + c] = to_byte(image.at(c * hw + i));
    return img;
}

Tensor pnm_to_image(const PnmImage& img) {
    const std::size_t hw = img.height * img.width;
    std::vector<double> data(hw * img.channels);
    for (std::size_t i = 0; i < hw; ++i)
        for (std::size_t c = 0; c < img.channels; ++c)
            data[c * hw + i] = static_cast<double>(img.pixels[i * img.channels + c]) / static_cast<double>(img.maxval);
    return Tensor(Shape{img.channels, img.height, img.width}, std::move(data));
}

SemanticLayout read_layout(const std::filesystem::path& path) {
    auto img = read_pnm(path);
    if (img.channels != 1) throw DataError("layout " + path.string() + " must be a P5 image");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (img.pixels[i] >= kNumClasses) {
            throw DataError("layout " + path.string() + ": pixel (x=" + std::to_string(i % img.width) +
                            ", y=" + std::to_string(i / img.width) + ") has class " +
                            std::to_string(img.pixels[i]) + ", valid range is 0..11");
        }
    }
    return SemanticLayout(img.height, img.width, std::move(img.pixels));
}

void write_layout(const std::filesystem::path& path, const SemanticLayout& layout) {
    PnmImage img;
    img.width = layout.width();
    img.height = layout.height();
    img.maxval = 11;
    img.pixels = layout.classes();
    write_pnm(path, img);
}

SaliencyMap read_saliency(const std::filesystem::path& path) {
    auto img = read_pnm(path);
    if (img.channels != 1) throw DataError("saliency map " + path.string() + " must be a P5 image");
    std::vector<double> v(img.pixels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(img.pixels[i]) / static_cast<double>(img.maxval);
    return SaliencyMap(img.height, img.width, std::move(v));
}

void write_saliency(const std::filesystem::path& path, const SaliencyMap& map) {
    PnmImage img;
    img.width = map.width();
    img.height = map.height();
    img.pixels.resize(map.values().size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = to_byte(map.values()[i]);
    write_pnm(path, img);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest " + path.string());
    std::vector<ManifestEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ManifestEntry e;
            e.id = j.at("id").get<std::string>();
            e.photo = j.at("photo").get<std::string>();
            e.sketch = j.at("sketch").get<std::string>();
            e.saliency_photo = j.at("saliency_photo").get<std::string>();
            e.saliency_sketch = j.at("saliency_sketch").get<std::string>();
            e.layout_photo = j.at("layout_photo").get<std::string>();
            e.layout_sketch = j.at("layout_sketch").get<std::string>();
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError("manifest " + path.string() + " line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write manifest " + path.string());
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["photo"] = e.photo;
        j["sketch"] = e.sketch;
        j["saliency_photo"] = e.saliency_photo;
        j["saliency_sketch"] = e.saliency_sketch;
        j["layout_photo"] = e.layout_photo;
        j["layout_sketch"] = e.layout_sketch;
        os << j.dump() << '\n';
    }
}

PairedSample load_sample(const std::filesystem::path& root, const ManifestEntry& e) {
    PairedSample s;
    s.id = e.id;
    auto photo = read_pnm(root / e.photo);
    if (photo.channels != 3) throw DataError("photo " + (root / e.photo).string() + " must be a P6 image");
    s.photo = pnm_to_image(photo);
    auto sketch = read_pnm(root / e.sketch);
    if (sketch.channels != 1) throw DataError("sketch " + (root / e.sketch).string() + " must be a P5 image");
    s.sketch = pnm_to_image(sketch);
    s.saliency_photo = read_saliency(root / e.saliency_photo);
    s.saliency_sketch = read_saliency(root / e.saliency_sketch);
    s.layout_photo = read_layout(root / e.layout_photo);
    s.layout_sketch = read_layout(root / e.layout_sketch);
    validate_sample(s);
    return s;
}

void save_sample(const std::filesystem::path& root, const ManifestEntry& e, const PairedSample& s) {
    write_pnm(root / e.photo, image_to_pnm(s.photo));
    write_pnm(root / e.sketch, image_to_pnm(s.sketch));
    write_saliency(root / e.saliency_photo, s.saliency_photo);
    write_saliency(root / e.saliency_sketch, s.saliency_sketch);
    write_layout(root / e.layout_photo, s.layout_photo);
    write_layout(root / e.layout_sketch, s.layout_sketch);
}

std::vector<PairedSample> load_corpus(const std::filesystem::path& manifest) {
    auto entries = read_manifest(manifest);
    auto root = manifest.parent_path();
    std::vector<PairedSample> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(load_sample(root, e));
    return out;
}

}  // namespace sgs
