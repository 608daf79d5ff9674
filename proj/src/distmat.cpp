#include "netscope/distmat.hpp"

#include "netscope/baselines.hpp"
#include "netscope/error.hpp"
#include "netscope/parallel.hpp"

#include <array>
#include <utility>

namespace netscope {

namespace {

constexpr std::array<std::pair<Measure, const char*>, 8> kMeasureNames{{
    {Measure::Gw, "gw"},
    {Measure::Euclidean, "euclidean"},
    {Measure::Cosine, "cosine"},
    {Measure::Wasserstein, "wasserstein"},
    {Measure::Rsm, "rsm"},
    {Measure::Rsa, "rsa"},
    {Measure::Cka, "cka"},
    {Measure::Cca, "cca"},
}};

GwConfig pair_config(const GwConfig& base, Eigen::Index i, Eigen::Index j) {
    GwConfig cfg = base;
    const auto lo = static_cast<std::uint64_t>(std::min(i, j));
    const auto hi = static_cast<std::uint64_t>(std::max(i, j));
    cfg.seed = derive_seed(base.seed, lo, hi);
    return cfg;
}

ActivationBundle prepared(const ActivationBundle& bundle, const RunOptions& opts) {
    validate(bundle);
    if (opts.subsample) return subsample(bundle, *opts.subsample);
    return bundle;
}

double checked_pair(Measure measure, const ActivationBundle& b, Eigen::Index i, Eigen::Index j,
                    const GwConfig& base) {
    const auto& la = b.layers[static_cast<std::size_t>(i)];
    const auto& lb = b.layers[static_cast<std::size_t>(j)];
    try {
        return layer_pair_distance(measure, la.data, lb.data, pair_config(base, i, j));
    } catch (const InputError& e) {
        throw InputError("layers '" + la.name + "' and '" + lb.name + "': " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError("layers '" + la.name + "' and '" + lb.name + "': " + e.what());
    }
}

std::vector<std::string> names_of(const ActivationBundle& b) {
    std::vector<std::string> names;
    for (const auto& l : b.layers) names.push_back(l.name);
    return names;
}

}  // namespace

std::string measure_name(Measure m) {
    for (const auto& [k, name] : kMeasureNames)
        if (k == m) return name;
    return "unknown";
}

Measure parse_measure(const std::string& name) {
    for (const auto& [k, n] : kMeasureNames)
        if (name == n) return k;
    throw InputError("unknown measure '" + name +
                     "' (expected gw, euclidean, cosine, wasserstein, rsm, rsa, cka, cca)");
}

bool requires_equal_dims(Measure m) {
    return m == Measure::Euclidean || m == Measure::Cosine || m == Measure::Wasserstein;
}

double layer_pair_distance(Measure m, const Matrix& a, const Matrix& b, const GwConfig& cfg) {
    switch (m) {
        case Measure::Gw: return gw_layer_distance(a, b, cfg);
        case Measure::Euclidean: return euclidean_layer_distance(a, b);
        case Measure::Cosine: return cosine_layer_distance(a, b);
        case Measure::Wasserstein: return wasserstein_distance(a, b);
        case Measure::Rsm: return rsm_distance(a, b);
        case Measure::Rsa: return rsa_distance(a, b);
        case Measure::Cka: return cka_distance(a, b);
        case Measure::Cca: return cca_distance(a, b);
    }
    throw InputError("unknown measure");
}

void check_measure_compatibility(const ActivationBundle& bundle, Measure measure) {
    if (!requires_equal_dims(measure)) return;
    const auto& first = bundle.layers.front();
    for (const auto& layer : bundle.layers)
        if (layer.features() != first.features())
            throw InputError(measure_name(measure) + " requires equal feature dimensions: layers '" +
                             first.name + "' (d=" + std::to_string(first.features()) + ") and '" +
                             layer.name + "' (d=" + std::to_string(layer.features()) + ")");
}

DistanceMatrix distance_matrix(const ActivationBundle& input, Measure measure,
                               const RunOptions& opts) {
    opts.gw.validate();
    const ActivationBundle bundle = prepared(input, opts);
    check_measure_compatibility(bundle, measure);

    const auto L = static_cast<Eigen::Index>(bundle.layer_count());
    std::vector<std::pair<Eigen::Index, Eigen::Index>> tasks;
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = i; j < L; ++j) tasks.emplace_back(i, j);

    std::vector<double> results(tasks.size());
    parallel_for(tasks.size(), opts.threads, [&](std::size_t t) {
        const auto [i, j] = tasks[t];
        results[t] = checked_pair(measure, bundle, i, j, opts.gw);
    });

    DistanceMatrix dm;
    dm.values.resize(L, L);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto [i, j] = tasks[t];
        dm.values(i, j) = results[t];
        dm.values(j, i) = results[t];
    }
    dm.layer_names = names_of(bundle);
    dm.measure_tag = measure_name(measure);
    dm.subsample = opts.subsample;
    dm.gw = opts.gw;
    if (!dm.values.allFinite())
        throw NumericalError(dm.measure_tag + ": non-finite distance matrix entries");
    return dm;
}

LayerProfile consecutive_profile(const ActivationBundle& input, Measure measure,
                                 const RunOptions& opts) {
    opts.gw.validate();
    const ActivationBundle bundle = prepared(input, opts);
    check_measure_compatibility(bundle, measure);

    const auto L = static_cast<Eigen::Index>(bundle.layer_count());
    LayerProfile profile;
    profile.values = Vector::Zero(std::max<Eigen::Index>(L - 1, 0));
    parallel_for(static_cast<std::size_t>(profile.values.size()), opts.threads,
                 [&](std::size_t t) {
                     const auto l = static_cast<Eigen::Index>(t) + 1;
                     profile.values(l - 1) = checked_pair(measure, bundle, l - 1, l, opts.gw);
                 });
    profile.layer_names = names_of(bundle);
    profile.measure_tag = measure_name(measure);
    return profile;
}

std::vector<int> flagged_diagonal(const DistanceMatrix& dm, double tol) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < dm.size(); ++i)
        if (dm.values(i, i) > tol) out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace netscope
