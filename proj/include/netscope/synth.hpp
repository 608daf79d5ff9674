#pragma once

#include "netscope/bundle.hpp"
#include "netscope/cluster.hpp"

#include <cstdint>
#include <vector>

namespace netscope {

struct ModularSpec {
    std::vector<int> moduli{59};
    std::uint64_t split_seed = 0;
    double train_fraction = 0.8;
};

/// Full grid a, b in [0, p_1) with the chained targets
/// c_1 = (a + b) mod p_1, c_k = (c_{k-1} + b) mod p_k.
struct ModularDataset {
    std::vector<int> moduli;
    std::vector<int> a, b;
    /// intermediates[k][s] = c_{k+1} for sample s; the last row is the final c.
    std::vector<std::vector<int>> intermediates;
    std::vector<std::size_t> train, validation;

    std::size_t size() const { return a.size(); }
    const std::vector<int>& target() const { return intermediates.back(); }
};

ModularDataset gen_modular(const ModularSpec& spec);

/// one-hot(a) concatenated with one-hot(b): size() x 2 p_1.
Matrix modular_embedding(const ModularDataset& ds);

/// Single-layer bundle ("Embed") holding the one-hot embedding, with the
/// final target attached as class labels.
ActivationBundle modular_bundle(const ModularDataset& ds);

enum class TransformKind { Orthogonal, Permutation, Translation, Nonlinear };
enum class Nonlinearity { Square, ReluMix, Sine };

TransformKind parse_transform(const std::string& s);
Nonlinearity parse_nonlinearity(const std::string& s);
std::string transform_name(TransformKind k);
std::string nonlinearity_name(Nonlinearity k);

struct PlannedLayer {
    int block_id = 0;
    Eigen::Index dim = 8;
    /// How this layer is derived from the previous one (ignored for layer 0).
    TransformKind kind = TransformKind::Orthogonal;
};

struct PlantedSpec {
    Eigen::Index n = 64;
    std::vector<PlannedLayer> layer_plan;
    std::uint64_t seed = 0;
    Nonlinearity nonlinearity = Nonlinearity::Square;
};

/// Convenience plan: `blocks` blocks of `layers_per_block` layers of width
/// `dim`, joined inside a block by `within` and across blocks by a nonlinear
/// transition.
PlantedSpec planted_spec(int blocks, int layers_per_block, Eigen::Index n, Eigen::Index dim,
                         TransformKind within, std::uint64_t seed,
                         Nonlinearity nonlinearity = Nonlinearity::Square);

struct PlantedBundle {
    ActivationBundle bundle;
    Partition ground_truth;
};

/// Layers inside a block are exact isometric images of their predecessor;
/// block transitions apply a random linear mix followed by the element-wise
/// nonlinearity. Throws InputError on inconsistent plans.
PlantedBundle gen_planted(const PlantedSpec& spec);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
Matrix random_orthogonal(Eigen::Index d, std::uint64_t seed);

}  // namespace netscope
