#pragma once

#include "netscope/bundle.hpp"
#include "netscope/gw.hpp"
#include "netscope/metric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace netscope {

enum class Measure { Gw, Euclidean, Cosine, Wasserstein, Rsm, Rsa, Cka, Cca };

std::string measure_name(Measure m);
Measure parse_measure(const std::string& name);

/// True for measures that compare sample i of one layer with sample i of the
/// other in a shared feature space (equal d required).
bool requires_equal_dims(Measure m);

/// Distance between two layers under one measure. CKA is reported as 1 - CKA.
double layer_pair_distance(Measure m, const Matrix& a, const Matrix& b, const GwConfig& cfg);

struct DistanceMatrix {
    Matrix values;
    std::vector<std::string> layer_names;
    std::string measure_tag;
    std::optional<SubsampleSpec> subsample;
    GwConfig gw;

    Eigen::Index size() const { return values.rows(); }
};

struct LayerProfile {
    /// values[l-1] = distance(layer l, layer l-1) for l = 1..L-1.
    Vector values;
    std::vector<std::string> layer_names;
    std::string measure_tag;
};

struct RunOptions {
    GwConfig gw;
    std::optional<SubsampleSpec> subsample;
    int threads = 1;
};

/// Full L x L matrix. Each unordered pair is solved once and mirrored; the
/// diagonal is computed explicitly as a self-consistency check. GW pair
/// (i, j) uses seed derive_seed(gw.seed, i, j) regardless of scheduling.
DistanceMatrix distance_matrix(const ActivationBundle& bundle, Measure measure,
                               const RunOptions& opts = {});

LayerProfile consecutive_profile(const ActivationBundle& bundle, Measure measure,
                                 const RunOptions& opts = {});

/// Layers whose self-distance exceeds `tol`.
std::vector<int> flagged_diagonal(const DistanceMatrix& dm, double tol = 1e-4);

/// Throws InputError naming the first pair (in row-major order) whose
/// feature dimensions differ, if the measure needs equal dimensions.
void check_measure_compatibility(const ActivationBundle& bundle, Measure measure);

}  // namespace netscope
