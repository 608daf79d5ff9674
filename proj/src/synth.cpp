#include "netscope/synth.hpp"

#include "netscope/error.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <map>
#include <set>

namespace netscope {

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal(rng);
    return m;
}

Matrix pad_columns(const Matrix& x, Eigen::Index dim) {
    Matrix out = Matrix::Zero(x.rows(), dim);
    out.leftCols(x.cols()) = x;
    return out;
}

void validate_plan(const PlantedSpec& spec) {
    if (spec.n < 2) throw InputError("planted: n must be >= 2");
    if (spec.layer_plan.empty()) throw InputError("planted: empty layer plan");
    std::set<int> seen{spec.layer_plan.front().block_id};
    for (std::size_t l = 0; l < spec.layer_plan.size(); ++l) {
        const auto& cur = spec.layer_plan[l];
        if (cur.dim < 1) throw InputError("planted: layer " + std::to_string(l) + " has dim < 1");
        if (l == 0) continue;
        const auto& prev = spec.layer_plan[l - 1];
        const bool same_block = cur.block_id == prev.block_id;
        if (same_block && cur.kind == TransformKind::Nonlinear)
            throw InputError("planted: inconsistent plan, nonlinear transform inside block " +
                             std::to_string(cur.block_id) + " at layer " + std::to_string(l));
        if (same_block && cur.dim < prev.dim)
            throw InputError("planted: inconsistent plan, layer " + std::to_string(l) +
                             " shrinks dimension inside a block (no isometric embedding)");
        if (!same_block && cur.kind != TransformKind::Nonlinear)
            throw InputError("planted: inconsistent plan, block transition at layer " +
                             std::to_string(l) + " must be nonlinear");
        if (!same_block && !seen.insert(cur.block_id).second)
            throw InputError("planted: inconsistent plan, block " + std::to_string(cur.block_id) +
                             " is not contiguous");
    }
}

}  // namespace

ModularDataset gen_modular(const ModularSpec& spec) {
    if (spec.moduli.empty()) throw InputError("modular: need at least one modulus");
    for (int p : spec.moduli)
        if (p < 2) throw InputError("modular: moduli must be >= 2");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw InputError("modular: train_fraction must be in (0, 1)");

    ModularDataset ds;
    ds.moduli = spec.moduli;
    const int p1 = spec.moduli.front();
    ds.intermediates.assign(spec.moduli.size(), {});
    for (int a = 0; a < p1; ++a) {
        for (int b = 0; b < p1; ++b) {
            ds.a.push_back(a);
            ds.b.push_back(b);
            int c = (a + b) % spec.moduli[0];
            ds.intermediates[0].push_back(c);
            for (std::size_t k = 1; k < spec.moduli.size(); ++k) {
                c = (c + b) % spec.moduli[k];
                ds.intermediates[k].push_back(c);
            }
        }
    }

    std::vector<std::size_t> idx(ds.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(spec.split_seed);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * spec.train_fraction));
    ds.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(ds.train.begin(), ds.train.end());
    std::sort(ds.validation.begin(), ds.validation.end());
    return ds;
}

Matrix modular_embedding(const ModularDataset& ds) {
    const int p1 = ds.moduli.front();
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(ds.size()), 2 * p1);
    for (std::size_t s = 0; s < ds.size(); ++s) {
        x(static_cast<Eigen::Index>(s), ds.a[s]) = 1.0;
        x(static_cast<Eigen::Index>(s), p1 + ds.b[s]) = 1.0;
    }
    return x;
}

ActivationBundle modular_bundle(const ModularDataset& ds) {
    ActivationBundle bundle;
    bundle.model_name = "modular-embedding";
    bundle.layers.push_back({0, "Embed", modular_embedding(ds)});
    bundle.sample_ids.reserve(ds.size());
    for (std::size_t s = 0; s < ds.size(); ++s)
        bundle.sample_ids.push_back(std::to_string(ds.a[s]) + "+" + std::to_string(ds.b[s]));
    Targets t;
    t.kind = TargetKind::Class;
    t.values.resize(static_cast<Eigen::Index>(ds.size()), 1);
    for (std::size_t s = 0; s < ds.size(); ++s) t.values(static_cast<Eigen::Index>(s), 0) = ds.target()[s];
    bundle.targets = std::move(t);
    std::string moduli;
    for (std::size_t k = 0; k < ds.moduli.size(); ++k) moduli += (k ? "," : "") + std::to_string(ds.moduli[k]);
    bundle.provenance["moduli"] = moduli;
    return bundle;
}

TransformKind parse_transform(const std::string& s) {
    if (s == "orthogonal") return TransformKind::Orthogonal;
    if (s == "permutation") return TransformKind::Permutation;
    if (s == "translation") return TransformKind::Translation;
    if (s == "nonlinear") return TransformKind::Nonlinear;
    throw InputError("unknown transform kind '" + s + "'");
}

Nonlinearity parse_nonlinearity(const std::string& s) {
    if (s == "square") return Nonlinearity::Square;
    if (s == "relu-mix") return Nonlinearity::ReluMix;
    if (s == "sine") return Nonlinearity::Sine;
    throw InputError("unknown nonlinearity '" + s + "'");
}

std::string transform_name(TransformKind k) {
    switch (k) {
        case TransformKind::Orthogonal: return "orthogonal";
        case TransformKind::Permutation: return "permutation";
        case TransformKind::Translation: return "translation";
        case TransformKind::Nonlinear: return "nonlinear";
    }
    return "unknown";
}

std::string nonlinearity_name(Nonlinearity k) {
    switch (k) {
        case Nonlinearity::Square: return "square";
        case Nonlinearity::ReluMix: return "relu-mix";
        case Nonlinearity::Sine: return "sine";
    }
    return "unknown";
}

Matrix random_orthogonal(Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Matrix g = gaussian(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i)
        if (r(i, i) < 0.0) q.col(i) *= -1.0;
    return q;
}

PlantedSpec planted_spec(int blocks, int layers_per_block, Eigen::Index n, Eigen::Index dim,
                         TransformKind within, std::uint64_t seed, Nonlinearity nonlinearity) {
    PlantedSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.nonlinearity = nonlinearity;
    for (int b = 0; b < blocks; ++b)
        for (int l = 0; l < layers_per_block; ++l)
            spec.layer_plan.push_back({b, dim, l == 0 ? TransformKind::Nonlinear : within});
    return spec;
}

PlantedBundle gen_planted(const PlantedSpec& spec) {
    validate_plan(spec);
    std::mt19937_64 rng(spec.seed);

    PlantedBundle out;
    out.bundle.model_name = "planted";
    out.bundle.sample_ids = default_sample_ids(spec.n);

    Matrix x = gaussian(spec.n, spec.layer_plan.front().dim, rng);
    std::vector<int> blocks;
    for (std::size_t l = 0; l < spec.layer_plan.size(); ++l) {
        const auto& plan = spec.layer_plan[l];
        if (l > 0) {
            switch (plan.kind) {
                case TransformKind::Orthogonal: {
                    const Matrix q = random_orthogonal(plan.dim, rng());
                    x = x * q.topRows(x.cols());
                    break;
                }
                case TransformKind::Permutation: {
                    std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
                    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
                    for (std::size_t i = perm.size(); i > 1; --i)
                        std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng() % i)]);
                    x = pad_columns(x(perm, Eigen::all), plan.dim);
                    break;
                }
                case TransformKind::Translation: {
                    Matrix padded = pad_columns(x, plan.dim);
                    const Matrix t = 3.0 * gaussian(1, plan.dim, rng);
                    x = padded.rowwise() + t.row(0);
                    break;
                }
                case TransformKind::Nonlinear: {
                    const Matrix w = gaussian(x.cols(), plan.dim, rng) /
                                     std::sqrt(static_cast<double>(x.cols()));
                    const Matrix z = (x.rowwise() - x.colwise().mean()) * w;
                    switch (spec.nonlinearity) {
                        case Nonlinearity::Square: x = z.array().square().matrix(); break;
                        case Nonlinearity::ReluMix: x = z.cwiseMax(0.0); break;
                        case Nonlinearity::Sine: x = z.array().sin().matrix(); break;
                    }
                    // Unit RMS per entry so every block lives on a comparable scale.
                    x = x.rowwise() - x.colwise().mean();
                    const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
                    if (rms > 0.0) x /= rms;
                    break;
                }
            }
        }
        out.bundle.layers.push_back({static_cast<int>(l), "L" + std::to_string(l) + "_B" + std::to_string(plan.block_id), x});
        blocks.push_back(plan.block_id);
    }

    std::map<int, int> remap;
    for (int b : blocks) remap.try_emplace(b, static_cast<int>(remap.size()));
    for (int b : blocks) out.ground_truth.labels.push_back(remap[b]);
    out.ground_truth.k = static_cast<int>(remap.size());
    out.ground_truth.measure = "ground_truth";
    out.bundle.provenance["generator"] = "planted";
    out.bundle.provenance["seed"] = std::to_string(spec.seed);
    return out;
}

}  // namespace netscope
