#pragma once

#include "netscope/bundle.hpp"
#include "netscope/gw.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace netscope {

enum class ProbeKind { Linear, Mlp, Gw };
std::string probe_kind_name(ProbeKind k);

struct ProbeRecord {
    int layer_id = 0;
    std::string name;
    /// Held-out mean squared residual (linear), held-out cross-entropy (mlp),
    /// or GW distance to the target (gw).
    double fit_error = 0.0;
    /// Held-out accuracy; class targets with linear/mlp probes only.
    std::optional<double> accuracy;
};

struct ProbeReport {
    std::vector<ProbeRecord> records;
    /// Layer ids, best first.
    std::vector<int> ranking;
    /// Layers whose fit_error is within 10% of the best one.
    std::vector<int> top_similar;
    ProbeKind kind = ProbeKind::Linear;
    TargetKind target_kind = TargetKind::Class;
};

constexpr double kHoldoutFraction = 0.2;
constexpr double kLinearRidge = 1e-6;
constexpr double kTopSimilarTolerance = 0.10;

/// Seeded split shared by every layer of a report: floor(0.8 n) training rows,
/// the rest held out. Both index lists are sorted.
struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};
Split holdout_split(Eigen::Index n, std::uint64_t seed);

struct LinearProbeConfig {
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Ridge least squares with intercept per layer. Class targets are regressed
/// as one-hot codes and decoded by argmax.
ProbeReport linear_probe(const ActivationBundle& bundle, const Targets& target,
                         const LinearProbeConfig& cfg = {});

struct MlpProbeConfig {
    int hidden = 100;
    int epochs = 200;
    double lr = 1e-3;
    int batch = 64;
    /// L2 penalty on weights.
    double alpha = 1e-4;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// One-hidden-layer ReLU network with softmax output trained by Adam on the
/// standardized training split.
ProbeReport mlp_probe(const ActivationBundle& bundle, const Targets& target,
                      const MlpProbeConfig& cfg = {});

/// GW distance from each layer to the target treated as a representation.
/// Class targets are used as a single column of integer codes.
ProbeReport gw_target_search(const ActivationBundle& bundle, const Targets& target,
                             const GwConfig& cfg = {}, int threads = 1);

}  // namespace netscope
