#include "netscope/bundle.hpp"

#include "netscope/error.hpp"
#include "netscope/npy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace netscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

Matrix from_c_order(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r * cols + c];
    return m;
}

std::vector<double> to_c_order(const Matrix& m) {
    std::vector<double> v(static_cast<std::size_t>(m.size()));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v[k++] = m(r, c);
    return v;
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw InputError(where + ": manifest is missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + ": manifest key '" + key + "' has wrong type");
    }
}

}  // namespace

std::vector<std::string> default_sample_ids(Eigen::Index n) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    return ids;
}

std::string layer_file_name(int id, const std::string& name) {
    std::string safe = name;
    for (char& c : safe) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return std::to_string(id) + "_" + safe + ".npy";
}

void validate(const ActivationBundle& bundle) {
    if (bundle.layers.empty()) throw InputError("bundle must contain >=1 layer");

    const Eigen::Index n = bundle.layers.front().samples();
    for (std::size_t i = 0; i < bundle.layers.size(); ++i) {
        const auto& layer = bundle.layers[i];
        const std::string tag = "layer '" + layer.name + "'";
        if (layer.layer_id != static_cast<int>(i))
            throw InputError(tag + ": layer ids must be contiguous from 0 (got " +
                             std::to_string(layer.layer_id) + " at position " +
                             std::to_string(i) + ")");
        if (layer.samples() < 1 || layer.features() < 1)
            throw InputError(tag + ": empty activation matrix");
        if (layer.samples() != n)
            throw InputError(tag + ": sample count " + std::to_string(layer.samples()) +
                             " differs from " + std::to_string(n));
        if (!layer.data.allFinite()) throw InputError(tag + ": non-finite activation entries");
    }
    if (static_cast<Eigen::Index>(bundle.sample_ids.size()) != n)
        throw InputError("sample_ids length " + std::to_string(bundle.sample_ids.size()) +
                         " differs from sample count " + std::to_string(n));
    if (bundle.targets) {
        if (bundle.targets->values.rows() != n || bundle.targets->values.cols() < 1)
            throw InputError("targets must have " + std::to_string(n) + " rows");
        if (!bundle.targets->values.allFinite()) throw InputError("targets: non-finite entries");
        if (bundle.targets->kind == TargetKind::Class &&
            bundle.targets->values.cols() != 1)
            throw InputError("class targets must be a single column");
    }
}

ActivationBundle read_bundle(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw InputError("missing file '" + manifest_path.string() + "'");

    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw InputError(manifest_path.string() + ": invalid JSON (" + e.what() + ")");
    }
    const std::string where = manifest_path.string();

    const int version = require<int>(manifest, "format_version", where);
    if (version != kFormatVersion)
        throw InputError(where + ": unsupported format_version " + std::to_string(version));

    ActivationBundle bundle;
    bundle.model_name = require<std::string>(manifest, "model_name", where);
    const auto sample_count = require<long long>(manifest, "sample_count", where);
    const json layers = require<json>(manifest, "layers", where);
    if (!layers.is_array()) throw InputError(where + ": 'layers' must be an array");

    for (const auto& entry : layers) {
        LayerActivations layer;
        layer.layer_id = require<int>(entry, "id", where);
        layer.name = require<std::string>(entry, "name", where);
        const std::string tag = "layer '" + layer.name + "'";
        const auto file = require<std::string>(entry, "file", where);
        const auto shape = require<std::vector<std::size_t>>(entry, "shape", where);
        const auto dtype = require<std::string>(entry, "dtype", where);
        if (shape.size() != 2) throw InputError(tag + ": manifest shape must be 2-D");

        const fs::path path = dir / file;
        if (!fs::exists(path)) throw InputError(tag + ": missing file '" + path.string() + "'");
        npy::Array arr;
        try {
            arr = npy::read(path);
        } catch (const InputError& e) {
            throw InputError(tag + ": " + e.what());
        }
        if (arr.shape != shape) {
            auto fmt = [](const std::vector<std::size_t>& s) {
                std::string out = "(";
                for (std::size_t i = 0; i < s.size(); ++i)
                    out += (i ? "," : "") + std::to_string(s[i]);
                return out + ")";
            };
            throw InputError(tag + ": shape mismatch, manifest " + fmt(shape) + " vs file " +
                             fmt(arr.shape));
        }
        if (npy::descr(arr.dtype) != dtype)
            throw InputError(tag + ": dtype mismatch, manifest '" + dtype + "' vs file '" +
                             npy::descr(arr.dtype) + "'");
        if (arr.dtype != npy::Dtype::f4 && arr.dtype != npy::Dtype::f8)
            throw InputError(tag + ": activations must be f4 or f8");
        if (static_cast<long long>(shape[0]) != sample_count)
            throw InputError(tag + ": sample count " + std::to_string(shape[0]) +
                             " differs from manifest sample_count " +
                             std::to_string(sample_count));
        layer.data = from_c_order(arr.values, shape[0], shape[1]);
        if (!layer.data.allFinite()) throw InputError(tag + ": non-finite activation entries");
        bundle.layers.push_back(std::move(layer));
    }
    std::stable_sort(bundle.layers.begin(), bundle.layers.end(),
                     [](const auto& a, const auto& b) { return a.layer_id < b.layer_id; });

    if (manifest.contains("sample_ids"))
        bundle.sample_ids = require<std::vector<std::string>>(manifest, "sample_ids", where);
    else
        bundle.sample_ids = default_sample_ids(static_cast<Eigen::Index>(sample_count));

    if (manifest.contains("targets") && !manifest["targets"].is_null()) {
        const json& t = manifest["targets"];
        const auto file = require<std::string>(t, "file", where);
        const auto kind = require<std::string>(t, "kind", where);
        if (kind != "class" && kind != "real")
            throw InputError(where + ": targets.kind must be 'class' or 'real'");
        const npy::Array arr = npy::read(dir / file);
        if (arr.shape.empty() || arr.shape.size() > 2)
            throw InputError("targets: array must be 1-D or 2-D");
        const std::size_t rows = arr.shape[0];
        const std::size_t cols = arr.shape.size() == 2 ? arr.shape[1] : 1;
        Targets targets;
        targets.kind = kind == "class" ? TargetKind::Class : TargetKind::Real;
        targets.values = from_c_order(arr.values, rows, cols);
        bundle.targets = std::move(targets);
    }

    if (manifest.contains("provenance") && manifest["provenance"].is_object()) {
        for (const auto& [key, value] : manifest["provenance"].items())
            bundle.provenance[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }

    validate(bundle);
    return bundle;
}

void write_bundle(const ActivationBundle& bundle, const fs::path& dir) {
    validate(bundle);

    std::error_code ec;
    fs::create_directories(dir / "layers", ec);
    if (ec) throw InputError("cannot create '" + (dir / "layers").string() + "': " + ec.message());

    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["model_name"] = bundle.model_name;
    manifest["sample_count"] = bundle.samples();
    manifest["layers"] = json::array();
    for (const auto& layer : bundle.layers) {
        const std::string file = "layers/" + layer_file_name(layer.layer_id, layer.name);
        const std::vector<std::size_t> shape{static_cast<std::size_t>(layer.samples()),
                                             static_cast<std::size_t>(layer.features())};
        const auto values = to_c_order(layer.data);
        npy::write_f8(dir / file, shape, values.data());
        manifest["layers"].push_back(
            {{"id", layer.layer_id}, {"name", layer.name}, {"file", file}, {"shape", shape},
             {"dtype", npy::descr(npy::Dtype::f8)}});
    }
    manifest["sample_ids"] = bundle.sample_ids;

    if (bundle.targets) {
        const auto& t = *bundle.targets;
        const std::size_t rows = static_cast<std::size_t>(t.values.rows());
        if (t.kind == TargetKind::Class) {
            std::vector<std::int64_t> codes(rows);
            for (std::size_t i = 0; i < rows; ++i)
                codes[i] = static_cast<std::int64_t>(std::llround(t.values(static_cast<Eigen::Index>(i), 0)));
            npy::write_i8(dir / "targets.npy", {rows}, codes.data());
        } else {
            const auto values = to_c_order(t.values);
            npy::write_f8(dir / "targets.npy",
                          {rows, static_cast<std::size_t>(t.values.cols())}, values.data());
        }
        manifest["targets"] = {{"file", "targets.npy"},
                               {"kind", t.kind == TargetKind::Class ? "class" : "real"}};
    }
    if (!bundle.provenance.empty()) manifest["provenance"] = bundle.provenance;

    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw InputError("cannot write '" + (dir / "manifest.json").string() + "'");
    out << manifest.dump(2) << '\n';
    if (!out) throw InputError("write failed for '" + (dir / "manifest.json").string() + "'");
}

}  // namespace netscope
