#pragma once

#include "netscope/bundle.hpp"
#include "netscope/emd.hpp"
#include "netscope/metric.hpp"

#include <cstdint>
#include <vector>

namespace netscope {

/// Frank-Wolfe settings for the squared-loss Gromov-Wasserstein problem.
struct GwConfig {
    int max_iters = 1000;
    /// Stop once (f_old - f_new) / |f_new| falls below this.
    double rel_tol = 1e-9;
    /// Extra solves from seeded random feasible couplings; best objective wins.
    int restarts = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GwResult {
    /// sum_{ijkl} (D1_ik - D2_jl)^2 pi_ij pi_kl at the returned coupling.
    double distance_sq = 0.0;
    Coupling coupling;
    int iterations = 0;
    bool converged = false;
    /// Objective after initialization and after every accepted step of the
    /// winning solve. Non-increasing by construction.
    std::vector<double> objective_trace;
};

/// Local minimizer of the GW objective by conditional gradient, starting from
/// the product coupling mu nu^T (plus cfg.restarts random starts).
///
/// Each step solves the linearized problem exactly with the network simplex,
/// then takes the exact minimizer of the quadratic along the segment. The
/// gradient uses the squared-loss split, so one step costs O(n^2 m + n m^2).
GwResult gw_distance(const IntraDistances& d1, const IntraDistances& d2, const Weights& mu,
                     const Weights& nu, const GwConfig& cfg = {});

/// sqrt of gw_distance between the intra-layer Euclidean distances of two
/// layers with uniform weights. Feature dimensions may differ.
double gw_layer_distance(const LayerActivations& a, const LayerActivations& b,
                         const GwConfig& cfg = {});
double gw_layer_distance(const Matrix& a, const Matrix& b, const GwConfig& cfg = {});

/// Evaluates the GW objective at an arbitrary coupling. Exact pairwise
/// summation for sparse plans; the squared-loss decomposition otherwise.
double gw_objective(const Matrix& d1, const Matrix& d2, const Matrix& coupling);

}  // namespace netscope
