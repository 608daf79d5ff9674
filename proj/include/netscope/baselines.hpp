#pragma once

#include "netscope/bundle.hpp"
#include "netscope/types.hpp"

namespace netscope {

// Comparison measures sharing the layer-pair interface with GW. All return
// distances: 0 for identical inputs, larger for less similar ones.

/// Mean over samples of |a_i - b_i|. Requires equal n and d.
double euclidean_layer_distance(const Matrix& a, const Matrix& b);

/// Mean over samples of 1 - cos(a_i, b_i). Rejects zero-norm rows.
double cosine_layer_distance(const Matrix& a, const Matrix& b);

/// |D_a - D_b|_F / n for the intra-layer distance matrices. d may differ.
double rsm_distance(const Matrix& a, const Matrix& b);

/// 1 - Pearson correlation of the strict upper triangles of D_a and D_b.
double rsa_distance(const Matrix& a, const Matrix& b);

/// Linear CKA, |A^T B|_F^2 / (|A^T A|_F |B^T B|_F) on column-centered data.
double cka_similarity(const Matrix& a, const Matrix& b);
inline double cka_distance(const Matrix& a, const Matrix& b) { return 1.0 - cka_similarity(a, b); }

/// Canonical correlations between the column spaces of the centered inputs,
/// sorted descending, limited to min(d_a, d_b, n - 1) and clipped to [0, 1].
Vector canonical_correlations(const Matrix& a, const Matrix& b);

/// 1 - mean canonical correlation.
double cca_distance(const Matrix& a, const Matrix& b);

}  // namespace netscope
