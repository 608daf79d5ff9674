#pragma once

#include "netscope/bundle.hpp"
#include "netscope/metric.hpp"
#include "netscope/types.hpp"

#include <vector>

namespace netscope {

/// Transport plan between two discrete measures.
struct Coupling {
    Matrix matrix;
    Weights row_marginal;
    Weights col_marginal;
};

/// Non-zero entries of a basic (vertex) transport plan; at most n + m - 1.
struct PlanEntry {
    Eigen::Index row;
    Eigen::Index col;
    double mass;
};

struct SparsePlan {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<PlanEntry> entries;

    Matrix to_dense() const;
};

struct EmdResult {
    Coupling coupling;
    double objective = 0.0;
};

struct SparseEmdResult {
    SparsePlan plan;
    double objective = 0.0;
    long pivots = 0;
};

/// Exact solution of min <cost, pi> over couplings of (mu, nu) by the primal
/// network simplex on the complete bipartite graph. Returns an optimal vertex.
///
/// Throws InputError on shape mismatch, non-finite costs, zero or negative
/// marginal entries, or marginal totals that differ by more than 1e-9.
SparseEmdResult solve_emd_sparse(const Matrix& cost, const Weights& mu, const Weights& nu);

EmdResult solve_emd(const Matrix& cost, const Weights& mu, const Weights& nu);

/// Wasserstein-2 distance between the rows of two same-dimension layers under
/// uniform weights: sqrt of the optimal squared-Euclidean transport cost.
double wasserstein_layer_distance(const LayerActivations& a, const LayerActivations& b);
double wasserstein_distance(const Matrix& a, const Matrix& b);

}  // namespace netscope
