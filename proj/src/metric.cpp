#include "netscope/metric.hpp"

#include "netscope/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace netscope {

IntraDistances pairwise_distances(const Matrix& data) {
    const Eigen::Index n = data.rows();
    const Vector sq = data.rowwise().squaredNorm();
    Matrix gram = data * data.transpose();

    IntraDistances out;
    out.matrix.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.matrix(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j));
            const double d = std::sqrt(d2);
            out.matrix(i, j) = d;
            out.matrix(j, i) = d;
        }
    }
    return out;
}

std::vector<Eigen::Index> subsample_indices(Eigen::Index n, const SubsampleSpec& spec) {
    if (spec.target_count < 1) throw InputError("subsample target_count must be positive");
    if (spec.target_count > n)
        throw InputError("subsample target_count " + std::to_string(spec.target_count) +
                         " exceeds sample count " + std::to_string(n));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    if (spec.target_count == n) return idx;

    // Partial Fisher-Yates with an explicit uniform draw so the selection is
    // independent of the standard library's shuffle implementation.
    std::mt19937_64 rng(spec.seed);
    for (Eigen::Index i = 0; i < spec.target_count; ++i) {
        const auto span = static_cast<std::uint64_t>(n - i);
        const auto j = i + static_cast<Eigen::Index>(rng() % span);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(spec.target_count));
    std::sort(idx.begin(), idx.end());
    return idx;
}

ActivationBundle subsample(const ActivationBundle& bundle, const SubsampleSpec& spec) {
    validate(bundle);
    const auto idx = subsample_indices(bundle.samples(), spec);

    ActivationBundle out;
    out.model_name = bundle.model_name;
    out.provenance = bundle.provenance;
    for (const auto& layer : bundle.layers)
        out.layers.push_back({layer.layer_id, layer.name, layer.data(idx, Eigen::all)});
    for (auto i : idx) out.sample_ids.push_back(bundle.sample_ids[static_cast<std::size_t>(i)]);
    if (bundle.targets)
        out.targets = Targets{bundle.targets->kind, bundle.targets->values(idx, Eigen::all)};
    return out;
}

Weights uniform_weights(Eigen::Index n) {
    if (n < 1) throw InputError("uniform_weights requires n >= 1");
    return Weights{Vector::Constant(n, 1.0 / static_cast<double>(n))};
}

ActivationBundle standardize(const ActivationBundle& bundle) {
    ActivationBundle out = bundle;
    for (auto& layer : out.layers) {
        const Eigen::RowVectorXd mean = layer.data.colwise().mean();
        layer.data.rowwise() -= mean;
        for (Eigen::Index c = 0; c < layer.data.cols(); ++c) {
            const double sd = std::sqrt(layer.data.col(c).squaredNorm() /
                                        static_cast<double>(layer.data.rows()));
            if (sd > 0.0) layer.data.col(c) /= sd;
        }
    }
    return out;
}

}  // namespace netscope
