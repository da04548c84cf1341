#include "sgs/graphrepr.hpp"

#include "json.hpp"
#include "sgs/error.hpp"
#include "sgs/ops.hpp"

namespace sgs {

namespace {

// Per-class variance node of rows [Cf, HW]. Evaluated in the two-pass form
//   (sum_{p in c} (F_p - mu)^2 + extra * mu^2) / n_c
// where extra = HW - n_c in literal mode and 0 in masked mode.
Tensor class_variance(const Tensor& rows, const std::vector<std::uint8_t>& classes,
                      const std::array<std::size_t, kNumClasses>& counts, VarianceMode mode) {
    const std::size_t cf = rows.dim(0), hw = rows.dim(1);
    std::vector<double> mu(kNumClasses * cf, 0.0);
    for (std::size_t f = 0; f < cf; ++f)
        for (std::size_t p = 0; p < hw; ++p) mu[classes[p] * cf + f] += rows.at(f * hw + p);
    for (std::size_t c = 0; c < kNumClasses; ++c)
        for (std::size_t f = 0; f < cf; ++f) mu[c * cf + f] = counts[c] ? mu[c * cf + f] / static_cast<double>(counts[c]) : 0.0;

    std::vector<double> out(kNumClasses * cf, 0.0);
    for (std::size_t f = 0; f < cf; ++f) {
        for (std::size_t p = 0; p < hw; ++p) {
            const double d = rows.at(f * hw + p) - mu[classes[p] * cf + f];
            out[classes[p] * cf + f] += d * d;
        }
    }
    std::array<double, kNumClasses> extra{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (!counts[c]) continue;
        extra[c] = mode == VarianceMode::Literal ? static_cast<double>(hw - counts[c]) : 0.0;
        const double n = static_cast<double>(counts[c]);
        for (std::size_t f = 0; f < cf; ++f) {
            const double m = mu[c * cf + f];
            out[c * cf + f] = (out[c * cf + f] + extra[c] * m * m) / n;
        }
    }

    auto nr = rows.node();
    return Tensor::from_op(Shape{kNumClasses, cf}, std::move(out), {rows},
                           [nr, classes, counts, mu, extra, cf, hw](std::span<const double> g) {
                               std::vector<double> gr(cf * hw, 0.0);
                               for (std::size_t f = 0; f < cf; ++f) {
                                   for (std::size_t p = 0; p < hw; ++p) {
                                       const std::size_t c = classes[p];
                                       const double n = static_cast<double>(counts[c]);
                                       const double m = mu[c * cf + f];
                                       gr[f * hw + p] = g[c * cf + f] *
                                                        (2.0 * (nr->data[f * hw + p] - m) + 2.0 * extra[c] * m / n) / n;
                                   }
                               }
                               nr->accumulate(gr);
                           });
}

Tensor as_rows(const Tensor& features) {
    if (features.rank() == 4 && features.dim(0) == 1) {
        return reshape(features, Shape{features.dim(1), features.dim(2) * features.dim(3)});
    }
    if (features.rank() == 3) return reshape(features, Shape{features.dim(0), features.dim(1) * features.dim(2)});
    throw ShapeError("graph features must be [Cf,H,W] or [1,Cf,H,W], got " + shape_str(features.shape()));
}

std::pair<std::size_t, std::size_t> spatial(const Tensor& features) {
    const std::size_t r = features.rank();
    return {features.dim(r - 2), features.dim(r - 1)};
}

nlohmann::json matrix_json(const Tensor& t) {
    nlohmann::json rows = nlohmann::json::array();
    const std::size_t r = t.dim(0), c = t.dim(1);
    for (std::size_t i = 0; i < r; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < c; ++j) row.push_back(t.at(i * c + j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

GraphNodes compute_nodes(const Tensor& features, const SemanticLayout& layout, VarianceMode mode) {
    auto rows = as_rows(features);
    auto [h, w] = spatial(features);
    if (h != layout.height() || w != layout.width()) {
        throw ShapeError("compute_nodes: features are " + std::to_string(w) + "x" + std::to_string(h) +
                         " but layout is " + std::to_string(layout.width()) + "x" + std::to_string(layout.height()));
    }
    const std::size_t cf = rows.dim(0);
    const auto counts = layout.class_counts();

    GraphNodes nodes;
    std::vector<double> inv(kNumClasses * cf, 0.0);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        nodes.present[c] = counts[c] > 0;
        for (std::size_t f = 0; f < cf; ++f) inv[c * cf + f] = counts[c] ? 1.0 / static_cast<double>(counts[c]) : 0.0;
    }
    auto indicator = reshape(one_hot(layout), Shape{kNumClasses, h * w});
    nodes.mu = mul(matmul(indicator, transpose(rows)), Tensor(Shape{kNumClasses, cf}, std::move(inv)));
    nodes.nu = class_variance(rows, layout.classes(), counts, mode);
    return nodes;
}

IntraClassGraph intra_graph(const Tensor& features, const GraphNodes& nodes) {
    auto rows = as_rows(features);
    if (rows.dim(0) != nodes.mu.dim(1)) {
        throw ShapeError("intra_graph: features have " + std::to_string(rows.dim(0)) + " channels, nodes have " +
                         std::to_string(nodes.mu.dim(1)));
    }
    auto pooled = mean(rows, {1});
    return {row_cosine(nodes.mu, pooled), row_cosine(nodes.nu, pooled)};
}

InterClassGraph inter_graph(const GraphNodes& nodes) {
    return {pairwise_distance(nodes.mu), pairwise_distance(nodes.nu)};
}

Tensor iag_loss(const IntraClassGraph& target, const IntraClassGraph& fake) {
    return add(sum(square(sub(target.c1, fake.c1))), sum(square(sub(target.c2, fake.c2))));
}

Tensor itg_loss(const InterClassGraph& target, const InterClassGraph& fake) {
    return add(sum(square(sub(target.e1, fake.e1))), sum(square(sub(target.e2, fake.e2))));
}

SemanticGraphs build_graphs(const Tensor& features, const SemanticLayout& layout, VarianceMode mode) {
    SemanticGraphs g;
    g.nodes = compute_nodes(features, layout, mode);
    g.intra = intra_graph(features, g.nodes);
    g.inter = inter_graph(g.nodes);
    return g;
}

std::string graphs_to_json(const SemanticGraphs& g) {
    nlohmann::ordered_json j;
    j["mu"] = matrix_json(g.nodes.mu);
    j["nu"] = matrix_json(g.nodes.nu);
    j["e1"] = matrix_json(g.inter.e1);
    j["e2"] = matrix_json(g.inter.e2);
    j["present"] = g.nodes.present;
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < kNumClasses; ++c) names.push_back(std::string(class_name(c)));
    j["classes"] = names;
    j["c1"] = std::vector<double>(g.intra.c1.data().begin(), g.intra.c1.data().end());
    j["c2"] = std::vector<double>(g.intra.c2.data().begin(), g.intra.c2.data().end());
    return j.dump(2);
}

}  // namespace sgs
