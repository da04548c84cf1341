#pragma once

#include <array>
#include <string>

#include "sgs/layout.hpp"
#include "sgs/tensor.hpp"

namespace sgs {

/// How the per-class variance node treats pixels outside the class.
enum class VarianceMode {
    /// Mask multiplies the features before the mean is subtracted, so every
    /// out-of-class pixel contributes mu^2.
    Literal,
    /// Variance over the class pixels only.
    Masked,
};

/// Per-class mean (mu) and variance (nu) nodes, each [12, Cf]. Classes
/// without pixels hold zero rows and present[c] == false.
struct GraphNodes {
    Tensor mu;
    Tensor nu;
    std::array<bool, kNumClasses> present{};
};

/// Cosine of the pooled feature vector with every mu row (c1) and nu row (c2).
struct IntraClassGraph {
    Tensor c1;  // [12]
    Tensor c2;  // [12]
};

/// Euclidean distances between all pairs of mu rows (e1) and nu rows (e2).
struct InterClassGraph {
    Tensor e1;  // [12, 12]
    Tensor e2;  // [12, 12]
};

/// Region-normalized nodes of `features` ([Cf, H, W] or [1, Cf, H, W]) under
/// `layout`, which must share its spatial size.
GraphNodes compute_nodes(const Tensor& features, const SemanticLayout& layout,
                         VarianceMode mode = VarianceMode::Literal);

IntraClassGraph intra_graph(const Tensor& features, const GraphNodes& nodes);
InterClassGraph inter_graph(const GraphNodes& nodes);

/// Sum over both cosine vectors of squared per-class differences.
Tensor iag_loss(const IntraClassGraph& target, const IntraClassGraph& fake);

/// Sum over both edge matrices and all rows of squared row differences,
/// i.e. the squared Frobenius distance of each matrix pair.
Tensor itg_loss(const InterClassGraph& target, const InterClassGraph& fake);

struct SemanticGraphs {
    GraphNodes nodes;
    IntraClassGraph intra;
    InterClassGraph inter;
};

SemanticGraphs build_graphs(const Tensor& features, const SemanticLayout& layout,
                            VarianceMode mode = VarianceMode::Literal);

/// {"mu", "nu", "e1", "e2", "present"} as a JSON document.
std::string graphs_to_json(const SemanticGraphs& graphs);

}  // namespace sgs
