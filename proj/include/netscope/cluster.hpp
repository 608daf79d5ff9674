#pragma once

#include "netscope/distmat.hpp"
#include "netscope/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace netscope {

enum class SimilarityMode { Reverse, Gaussian };

std::string mode_name(SimilarityMode m);
SimilarityMode parse_mode(const std::string& name);

struct Partition {
    std::vector<int> labels;
    int k = 0;
    /// lambda_{i+1} - lambda_i of the normalized Laplacian, ascending spectrum.
    std::vector<double> eigengaps;
    SimilarityMode mode = SimilarityMode::Reverse;
    std::string measure;
};

/// Similarity matrix with zero diagonal. Reverse: max(D) - D. Gaussian:
/// exp(-D^2 / (2 sigma^2)) with sigma the median off-diagonal distance.
Matrix similarity_matrix(const Matrix& distances, SimilarityMode mode);

/// I - Delta^{-1/2} S Delta^{-1/2}. Throws InputError naming the first
/// zero-degree layer.
Matrix normalized_laplacian(const Matrix& similarity,
                            const std::vector<std::string>& names = {});

/// Spectral clustering of layers: k smallest eigenvectors of the normalized
/// Laplacian, rows normalized, then k-means++ (20 seeded restarts, lowest
/// inertia kept). Cluster ids are renumbered in order of first appearance.
Partition cluster_layers(const DistanceMatrix& dm, int k,
                         SimilarityMode mode = SimilarityMode::Reverse, std::uint64_t seed = 0);

struct KSuggestion {
    int k = 2;
    /// Chosen gap divided by the largest competing gap, where the competitors
    /// include the k = 1 gap (a single dominant cluster).
    double confidence_ratio = 0.0;
    bool low_confidence = true;
    std::vector<double> eigengaps;
};

constexpr double kLowConfidenceRatio = 1.5;

/// argmax eigengap over k in [2, min(L - 1, 8)].
KSuggestion suggest_k(const DistanceMatrix& dm, SimilarityMode mode = SimilarityMode::Reverse);

/// Lloyd's k-means with k-means++ seeding; exposed for testing.
struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0;
};
KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace netscope
