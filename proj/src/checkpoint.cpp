#include "sgs/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "sgs/error.hpp"

namespace sgs {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'S', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& where) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw DataError("checkpoint truncated reading " + where);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is, const std::string& where) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw DataError("checkpoint truncated reading " + where);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

void put_entry(std::ostream& os, const std::string& name, const Shape& shape, std::span<const double> values) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(os, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_u32(os, static_cast<std::uint32_t>(d));
    for (double v : values) put_f64(os, v);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<const Parameter*>& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
    os.write(kMagic, 4);
    for (const Parameter* p : params) {
        put_entry(os, p->name, p->value.shape(), p->value.data());
        put_entry(os, p->name + ".m1", p->value.shape(), p->m1);
        put_entry(os, p->name + ".m2", p->value.shape(), p->m2);
        const double step = static_cast<double>(p->step);
        put_entry(os, p->name + ".step", Shape{1}, std::span<const double>(&step, 1));
    }
    if (!os) throw DataError("failed writing checkpoint " + path.string());
}

std::map<std::string, StoredArray> read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("not an SGS1 checkpoint: " + path.string());
    }
    std::map<std::string, StoredArray> out;
    while (is.peek() != std::char_traits<char>::eof()) {
        const auto len = get_u32(is, "name length");
        std::string name(len, '\0');
        if (!is.read(name.data(), len)) throw DataError("checkpoint truncated reading name");
        const auto rank = get_u32(is, name + " rank");
        StoredArray arr;
        for (std::uint32_t i = 0; i < rank; ++i) arr.shape.push_back(get_u32(is, name + " dims"));
        arr.values.resize(shape_numel(arr.shape));
        for (auto& v : arr.values) v = get_f64(is, name + " values");
        out.emplace(std::move(name), std::move(arr));
    }
    return out;
}

void load_parameters(const std::filesystem::path& path, const std::vector<Parameter*>& params) {
    auto stored = read_checkpoint(path);
    auto fetch = [&](const std::string& name, const Shape& shape) -> const StoredArray& {
        auto it = stored.find(name);
        if (it == stored.end()) throw DataError("checkpoint " + path.string() + " lacks entry '" + name + "'");
        if (it->second.shape != shape) {
            throw DataError("checkpoint entry '" + name + "' has shape " + shape_str(it->second.shape) +
                            ", expected " + shape_str(shape));
        }
        return it->second;
    };
    for (Parameter* p : params) {
        const auto& v = fetch(p->name, p->value.shape());
        std::copy(v.values.begin(), v.values.end(), p->value.mutable_data().begin());
        p->m1 = fetch(p->name + ".m1", p->value.shape()).values;
        p->m2 = fetch(p->name + ".m2", p->value.shape()).values;
        p->step = static_cast<std::int64_t>(fetch(p->name + ".step", Shape{1}).values.at(0));
        p->value.zero_grad();
    }
}

}  // namespace sgs
