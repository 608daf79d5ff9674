#pragma once

#include "netscope/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace netscope {

/// One layer's representation of the shared sample set: an n x d matrix.
struct LayerActivations {
    int layer_id = 0;
    std::string name;
    Matrix data;

    Eigen::Index samples() const { return data.rows(); }
    Eigen::Index features() const { return data.cols(); }
};

enum class TargetKind { Class, Real };

/// Optional supervision attached to a bundle. Class targets are an n x 1
/// matrix of integer codes; real targets are n x t.
struct Targets {
    TargetKind kind = TargetKind::Class;
    Matrix values;
};

/// Ordered per-layer activations of one model snapshot on one sample set.
struct ActivationBundle {
    std::string model_name;
    std::vector<LayerActivations> layers;
    std::vector<std::string> sample_ids;
    std::optional<Targets> targets;
    /// Free-form provenance notes echoed from / to the manifest. Numeric
    /// entries (e.g. "metric") are consumed by trajectory tracking.
    std::map<std::string, std::string> provenance;

    Eigen::Index samples() const { return layers.empty() ? 0 : layers.front().samples(); }
    std::size_t layer_count() const { return layers.size(); }
};

/// Throws InputError naming the offending layer if any bundle invariant is
/// broken: empty layer list, non-contiguous ids, inconsistent n, zero-sized
/// layers, non-finite entries, or sample_ids/targets length mismatch.
void validate(const ActivationBundle& bundle);

/// Loads and validates a bundle directory (manifest.json + layers/*.npy).
/// 32-bit payloads are widened to double.
ActivationBundle read_bundle(const std::filesystem::path& dir);

/// Writes a bundle directory. All layers are stored as "<f8" so a subsequent
/// read_bundle reproduces the data bit-for-bit.
void write_bundle(const ActivationBundle& bundle, const std::filesystem::path& dir);

/// Default sample ids "0".."n-1".
std::vector<std::string> default_sample_ids(Eigen::Index n);

/// File-system safe layer file stem: "<id>_<name>" with unsafe characters
/// replaced by '_'.
std::string layer_file_name(int id, const std::string& name);

}  // namespace netscope
