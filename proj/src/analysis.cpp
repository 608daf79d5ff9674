#include "netscope/analysis.hpp"

#include "netscope/error.hpp"
#include "netscope/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netscope {

namespace {

std::vector<double> upper_values(const Matrix& d) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(d.rows() * (d.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) v.push_back(d(i, j));
    return v;
}

}  // namespace

double smoothed_kl(const Vector& p, const Vector& q) {
    if (p.size() != q.size()) throw InputError("kl: histograms differ in size");
    const Vector ps = (p.array() + kHistogramSmoothing) / (p.sum() + kHistogramSmoothing * static_cast<double>(p.size()));
    const Vector qs = (q.array() + kHistogramSmoothing) / (q.sum() + kHistogramSmoothing * static_cast<double>(q.size()));
    double kl = 0.0;
    for (Eigen::Index i = 0; i < ps.size(); ++i) kl += ps(i) * std::log(ps(i) / qs(i));
    return std::max(0.0, kl);
}

HistogramSet distance_histograms(const ActivationBundle& bundle, int bins) {
    validate(bundle);
    if (bins < 2) throw InputError("histograms: bins must be >= 2");
    if (bundle.samples() < 2) throw InputError("histograms: need at least 2 samples");

    std::vector<std::vector<double>> values;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& layer : bundle.layers) {
        values.push_back(upper_values(pairwise_distances(layer).matrix));
        const auto [mn, mx] = std::minmax_element(values.back().begin(), values.back().end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (hi <= lo) hi = lo + 1.0;
    const double width = (hi - lo) / bins;

    HistogramSet out;
    out.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) out.bin_edges(b) = lo + width * b;
    out.bin_edges(bins) = hi;

    for (std::size_t l = 0; l < values.size(); ++l) {
        Vector mass = Vector::Zero(bins);
        for (double x : values[l]) {
            auto b = static_cast<int>(std::floor((x - lo) / width));
            mass(std::clamp(b, 0, bins - 1)) += 1.0;
        }
        out.masses.push_back(mass / static_cast<double>(values[l].size()));
        out.layer_names.push_back(bundle.layers[l].name);
    }
    out.consecutive_kl = Vector::Zero(static_cast<Eigen::Index>(values.size()) - 1);
    for (Eigen::Index l = 1; l < static_cast<Eigen::Index>(values.size()); ++l)
        out.consecutive_kl(l - 1) = smoothed_kl(out.masses[static_cast<std::size_t>(l)],
                                                out.masses[static_cast<std::size_t>(l - 1)]);
    return out;
}

std::vector<Eigen::Index> nearest_neighbors(const Matrix& data, Eigen::Index anchor, int k) {
    const Eigen::Index n = data.rows();
    if (anchor < 0 || anchor >= n) throw InputError("jaccard: anchor index out of range");
    if (k < 1 || k >= n)
        throw InputError("jaccard: k = " + std::to_string(k) + " must be in [1, n) with n = " +
                         std::to_string(n));
    std::vector<std::pair<double, Eigen::Index>> d;
    d.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != anchor) d.emplace_back((data.row(i) - data.row(anchor)).squaredNorm(), i);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    std::vector<Eigen::Index> out;
    for (int i = 0; i < k; ++i) out.push_back(d[static_cast<std::size_t>(i)].second);
    return out;
}

double jaccard(const std::set<Eigen::Index>& a, const std::set<Eigen::Index>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (auto x : a) inter += b.count(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

JaccardTable neighborhood_jaccard(const ActivationBundle& bundle, int k,
                                  const std::vector<Eigen::Index>& anchors, int reference_layer) {
    validate(bundle);
    const auto L = static_cast<int>(bundle.layer_count());
    if (reference_layer < 0 || reference_layer >= L)
        throw InputError("jaccard: reference layer " + std::to_string(reference_layer) + " out of range");
    if (anchors.empty()) throw InputError("jaccard: no anchor samples");
    if (k >= bundle.samples())
        throw InputError("jaccard: k = " + std::to_string(k) + " must be smaller than n = " +
                         std::to_string(bundle.samples()));

    JaccardTable t;
    t.anchors = anchors;
    t.reference_layer = reference_layer;
    for (int l = 0; l < L; ++l)
        if (l != reference_layer) {
            t.layers.push_back(l);
            t.layer_names.push_back(bundle.layers[static_cast<std::size_t>(l)].name);
        }
    t.values.resize(static_cast<Eigen::Index>(anchors.size()), static_cast<Eigen::Index>(t.layers.size()));

    const Matrix& ref = bundle.layers[static_cast<std::size_t>(reference_layer)].data;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const auto ref_nn = nearest_neighbors(ref, anchors[a], k);
        const std::set<Eigen::Index> ref_set(ref_nn.begin(), ref_nn.end());
        for (std::size_t c = 0; c < t.layers.size(); ++c) {
            const auto nn = nearest_neighbors(bundle.layers[static_cast<std::size_t>(t.layers[c])].data, anchors[a], k);
            t.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) =
                jaccard(ref_set, std::set<Eigen::Index>(nn.begin(), nn.end()));
        }
    }
    t.anchor_means = t.values.cols() > 0 ? Vector(t.values.rowwise().mean())
                                         : Vector::Ones(t.values.rows());
    return t;
}

std::vector<TrajectoryPoint> trajectory(const std::vector<ActivationBundle>& checkpoints,
                                        const RunOptions& opts) {
    if (checkpoints.empty()) throw InputError("trajectory: no checkpoints");
    const auto& first = checkpoints.front();
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const auto& b = checkpoints[c];
        validate(b);
        bool same = b.layer_count() == first.layer_count() && b.sample_ids == first.sample_ids;
        for (std::size_t l = 0; same && l < b.layer_count(); ++l)
            same = b.layers[l].name == first.layers[l].name;
        if (!same)
            throw InputError("trajectory: checkpoint " + std::to_string(c) +
                             " does not share the layer structure and sample ids of checkpoint 0");
    }

    std::vector<TrajectoryPoint> out;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const auto& b = checkpoints[c];
        const DistanceMatrix dm = distance_matrix(b, Measure::Gw, opts);
        TrajectoryPoint p;
        const auto tag = b.provenance.find("checkpoint");
        p.checkpoint_tag = tag != b.provenance.end() ? tag->second
                          : !b.model_name.empty()    ? b.model_name
                                                     : std::to_string(c);
        const Eigen::Index L = dm.size();
        double sum = 0.0;
        for (Eigen::Index i = 0; i < L; ++i)
            for (Eigen::Index j = i + 1; j < L; ++j) sum += dm.values(i, j);
        p.mean_offdiag_gw = L > 1 ? sum / static_cast<double>(L * (L - 1) / 2) : 0.0;
        if (const auto m = b.provenance.find("metric"); m != b.provenance.end()) {
            try {
                p.metric = std::stod(m->second);
            } catch (const std::exception&) {
                throw InputError("trajectory: provenance metric '" + m->second + "' is not a number");
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace netscope
