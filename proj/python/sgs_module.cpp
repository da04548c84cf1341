#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "sgs/cycletrain.hpp"
#include "sgs/datagen.hpp"
#include "sgs/error.hpp"
#include "sgs/graphrepr.hpp"
#include "sgs/metrics.hpp"
#include "sgs/network.hpp"
#include "sgs/ops.hpp"

namespace py = pybind11;
using namespace sgs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    Shape shape(a.shape(), a.shape() + a.ndim());
    return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
    Array out(std::vector<py::ssize_t>(t.shape().begin(), t.shape().end()));
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

SemanticLayout to_layout(const LabelArray& a) {
    if (a.ndim() != 2) throw ShapeError("layout must be a 2-D array of class indices");
    return SemanticLayout(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                          std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

LabelArray from_layout(const SemanticLayout& l) {
    LabelArray out({l.height(), l.width()});
    std::copy(l.classes().begin(), l.classes().end(), out.mutable_data());
    return out;
}

GrayImage to_gray_image(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D grayscale array");
    return {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
            std::vector<double>(a.data(), a.data() + a.size())};
}

Eigen::MatrixXd to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D feature matrix");
    Eigen::MatrixXd m(a.shape(0), a.shape(1));
    for (py::ssize_t r = 0; r < a.shape(0); ++r)
        for (py::ssize_t c = 0; c < a.shape(1); ++c) m(r, c) = a.at(r, c);
    return m;
}

VarianceMode variance_mode(const std::string& s) {
    if (s == "literal") return VarianceMode::Literal;
    if (s == "masked") return VarianceMode::Masked;
    throw ConfigError("variance must be literal or masked, got '" + s + "'");
}

py::dict graphs_dict(const SemanticGraphs& g) {
    py::dict d;
    d["mu"] = to_array(g.nodes.mu);
    d["nu"] = to_array(g.nodes.nu);
    d["c1"] = to_array(g.intra.c1);
    d["c2"] = to_array(g.intra.c2);
    d["e1"] = to_array(g.inter.e1);
    d["e2"] = to_array(g.inter.e2);
    d["present"] = std::vector<bool>(g.nodes.present.begin(), g.nodes.present.end());
    return d;
}

py::dict sample_dict(const PairedSample& s) {
    py::dict d;
    d["id"] = s.id;
    d["photo"] = to_array(s.photo);
    d["sketch"] = to_array(s.sketch);
    d["saliency_photo"] = to_array(s.saliency_photo.to_tensor());
    d["saliency_sketch"] = to_array(s.saliency_sketch.to_tensor());
    d["layout_photo"] = from_layout(s.layout_photo);
    d["layout_sketch"] = from_layout(s.layout_sketch);
    return d;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw DataError("cannot read " + p.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

PYBIND11_MODULE(_sgs, m) {
    m.doc() = "Semantic-driven photo/sketch synthesis core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def(
        "generate_sample",
        [](std::size_t index, std::size_t size, std::uint64_t seed, const std::string& mode) {
            DatagenOptions o;
            o.size = size;
            o.seed = seed;
            o.mode = parse_corpus_mode(mode);
            return sample_dict(generate_sample(index, o));
        },
        py::arg("index"), py::arg("size") = 64, py::arg("seed") = 7, py::arg("mode") = "aligned");

    m.def(
        "generate_corpus",
        [](std::size_t n, const std::filesystem::path& out, std::size_t size, std::uint64_t seed,
           const std::string& mode, double glasses_fraction) {
            DatagenOptions o;
            o.size = size;
            o.seed = seed;
            o.mode = parse_corpus_mode(mode);
            o.glasses_fraction = glasses_fraction;
            py::gil_scoped_release release;
            return generate_corpus(n, o, out);
        },
        py::arg("n"), py::arg("out"), py::arg("size") = 64, py::arg("seed") = 7, py::arg("mode") = "aligned",
        py::arg("glasses_fraction") = 0.5, "Writes the corpus and returns the manifest path.");

    m.def(
        "corpus_stats", [](const std::filesystem::path& manifest) { return corpus_stats(manifest).to_json(); },
        py::arg("manifest"), "Corpus statistics as a JSON string.");

    m.def(
        "load_corpus",
        [](const std::filesystem::path& manifest) {
            py::list out;
            for (const auto& s : load_corpus(manifest)) out.append(sample_dict(s));
            return out;
        },
        py::arg("manifest"));

    m.def(
        "build_graphs",
        [](const Array& features, const LabelArray& layout, const std::string& variance) {
            return graphs_dict(build_graphs(to_tensor(features), to_layout(layout), variance_mode(variance)));
        },
        py::arg("features"), py::arg("layout"), py::arg("variance") = "literal");

    m.def(
        "graph_losses",
        [](const Array& target, const Array& fake, const LabelArray& layout, const std::string& variance) {
            const auto l = to_layout(layout);
            const auto mode = variance_mode(variance);
            const auto t = build_graphs(to_tensor(target), l, mode);
            const auto f = build_graphs(to_tensor(fake), l, mode);
            return py::make_tuple(iag_loss(t.intra, f.intra).item(), itg_loss(t.inter, f.inter).item());
        },
        py::arg("target"), py::arg("fake"), py::arg("layout"), py::arg("variance") = "literal",
        "(iag, itg) between the graphs of two feature maps under one layout.");

    m.def(
        "ssim", [](const Array& x, const Array& y) { return ssim(to_gray_image(x), to_gray_image(y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "fsim", [](const Array& x, const Array& y) { return fsim(to_gray_image(x), to_gray_image(y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "phase_congruency",
        [](const Array& x) {
            const auto pc = phase_congruency(to_gray_image(x));
            Array out({pc.height, pc.width});
            std::copy(pc.pixels.begin(), pc.pixels.end(), out.mutable_data());
            return out;
        },
        py::arg("image"), "Phase congruency of an image on a 0..255 scale.");
    m.def(
        "frechet_distance", [](const Array& a, const Array& b) { return frechet_distance(to_matrix(a), to_matrix(b)); },
        py::arg("a"), py::arg("b"));

    py::class_<Generator, std::shared_ptr<Generator>>(m, "Generator")
        .def_static(
            "load",
            [](const std::filesystem::path& dir) {
                auto g = std::make_shared<Generator>(config_from_json(read_text(dir / "model.json")));
                g->load_weights(dir);
                return g;
            },
            py::arg("checkpoint_dir"))
        .def(
            "forward",
            [](const Generator& g, const Array& source, const Array& saliency, const LabelArray& layout) {
                NoGradGuard guard;
                auto sal = to_tensor(saliency);
                if (sal.rank() == 2) sal = reshape(sal, Shape{1, 1, sal.dim(0), sal.dim(1)});
                return to_array(g.forward(to_tensor(source), sal, to_layout(layout)).image);
            },
            py::arg("source"), py::arg("saliency"), py::arg("layout"))
        .def_property_readonly("config", [](const Generator& g) { return config_to_json(g.config()); });

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("image_size", &TrainConfig::image_size)
        .def_readwrite("depth", &TrainConfig::depth)
        .def_readwrite("base_channels", &TrainConfig::base_channels)
        .def_readwrite("max_channels", &TrainConfig::max_channels)
        .def_readwrite("si_hidden", &TrainConfig::si_hidden)
        .def_readwrite("disc_channels", &TrainConfig::disc_channels)
        .def_readwrite("iterations", &TrainConfig::iterations)
        .def_readwrite("use_saliency", &TrainConfig::use_saliency)
        .def("validate", &TrainConfig::validate)
        .def("to_json", [](const TrainConfig& c) { return train_config_to_json(c); });

    m.def(
        "train_stage0",
        [](const TrainConfig& config, const std::filesystem::path& manifest, const std::filesystem::path& run_dir,
           const std::string& direction, std::size_t val_count) {
            config.validate();
            const auto data = split_corpus(load_corpus(manifest), val_count);
            const LossNetworks nets(config);
            StageResult r;
            {
                py::gil_scoped_release release;
                r = train_stage(config, nets, parse_direction(direction), 0, data, nullptr, run_dir);
            }
            py::dict d;
            d["checkpoint"] = r.checkpoint.dir;
            d["digest"] = r.checkpoint.digest;
            d["epoch_total"] = r.epoch_total;
            d["ssim"] = r.report.ssim_mean;
            d["fsim"] = r.report.fsim_mean;
            d["frechet"] = r.report.frechet_proxy;
            return d;
        },
        py::arg("config"), py::arg("manifest"), py::arg("run_dir"), py::arg("direction") = "k",
        py::arg("val_count") = 8, "Trains one stage-0 direction and returns its summary.");
}
