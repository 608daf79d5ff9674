#pragma once

#include "netscope/bundle.hpp"
#include "netscope/types.hpp"

#include <cstdint>

namespace netscope {

/// Symmetric, zero-diagonal matrix of Euclidean distances between the rows of
/// one layer.
struct IntraDistances {
    Matrix matrix;
    std::string metric_tag = "euclidean";

    Eigen::Index size() const { return matrix.rows(); }
};

/// Probability weights over samples.
struct Weights {
    Vector vector;

    Eigen::Index size() const { return vector.size(); }
};

struct SubsampleSpec {
    Eigen::Index target_count = 1000;
    std::uint64_t seed = 0;
};

/// Euclidean distances between the rows of `data`, via the Gram form
/// max(0, |a|^2 + |b|^2 - 2 a.b) with an exact zero diagonal.
IntraDistances pairwise_distances(const Matrix& data);
inline IntraDistances pairwise_distances(const LayerActivations& layer) {
    return pairwise_distances(layer.data);
}

/// Draws target_count distinct sample indices (seeded, without replacement)
/// and applies the same selection to every layer, the sample ids and the
/// targets. Selected rows keep their original relative order.
ActivationBundle subsample(const ActivationBundle& bundle, const SubsampleSpec& spec);

/// The index set used by subsample(), sorted ascending.
std::vector<Eigen::Index> subsample_indices(Eigen::Index n, const SubsampleSpec& spec);

Weights uniform_weights(Eigen::Index n);

/// Column-wise z-scoring (zero mean, unit variance; constant columns are only
/// centered). Exposed for the CLI's --standardize flag.
ActivationBundle standardize(const ActivationBundle& bundle);

}  // namespace netscope
