#pragma once

#include "netscope/bundle.hpp"
#include "netscope/distmat.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace netscope {

constexpr double kHistogramSmoothing = 1e-10;

/// Histograms of the strict-upper-triangle intra-layer distances, one per
/// layer, over shared equal-width bins spanning the pooled range.
struct HistogramSet {
    Vector bin_edges;               // bins + 1
    std::vector<Vector> masses;     // one per layer, each sums to 1
    Vector consecutive_kl;          // [l-1] = KL(P_l || P_{l-1})
    std::vector<std::string> layer_names;
};

HistogramSet distance_histograms(const ActivationBundle& bundle, int bins = 50);

/// KL(p || q) after adding kHistogramSmoothing to every bin and renormalizing.
double smoothed_kl(const Vector& p, const Vector& q);

/// Indices of the k nearest samples to `anchor` (self excluded), ties broken
/// by lower index.
std::vector<Eigen::Index> nearest_neighbors(const Matrix& data, Eigen::Index anchor, int k);

double jaccard(const std::set<Eigen::Index>& a, const std::set<Eigen::Index>& b);

struct JaccardTable {
    std::vector<Eigen::Index> anchors;
    std::vector<int> layers;   // every layer except the reference
    int reference_layer = 0;
    Matrix values;             // anchors x layers
    Vector anchor_means;
    std::vector<std::string> layer_names;
};

JaccardTable neighborhood_jaccard(const ActivationBundle& bundle, int k,
                                  const std::vector<Eigen::Index>& anchors, int reference_layer);

struct TrajectoryPoint {
    std::string checkpoint_tag;
    double mean_offdiag_gw = 0.0;
    std::optional<double> metric;
};

/// Mean strict-upper-triangle GW distance per checkpoint. Checkpoint tags and
/// optional metrics come from the manifests' provenance ("checkpoint",
/// "metric"); the model name is the fallback tag.
std::vector<TrajectoryPoint> trajectory(const std::vector<ActivationBundle>& checkpoints,
                                        const RunOptions& opts = {});

}  // namespace netscope
