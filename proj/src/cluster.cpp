#include "netscope/cluster.hpp"

#include "netscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace netscope {

namespace {

constexpr int kKMeansRestarts = 20;
constexpr int kLloydIters = 300;

double median_offdiag(const Matrix& d) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) v.push_back(d(i, j));
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void check_distance_matrix(const Matrix& d) {
    if (d.rows() != d.cols() || d.rows() < 1)
        throw InputError("distance matrix must be square and non-empty");
    if (!d.allFinite()) throw InputError("distance matrix has non-finite entries");
    if (((d - d.transpose()).cwiseAbs().array() > 1e-9 * std::max(1.0, d.cwiseAbs().maxCoeff()))
            .any())
        throw InputError("distance matrix is not symmetric");
}

Eigen::SelfAdjointEigenSolver<Matrix> spectrum(const DistanceMatrix& dm, SimilarityMode mode) {
    check_distance_matrix(dm.values);
    const Matrix lap = normalized_laplacian(similarity_matrix(dm.values, mode), dm.layer_names);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    return eig;
}

std::vector<double> gaps_of(const Vector& lambda) {
    std::vector<double> g;
    for (Eigen::Index i = 0; i + 1 < lambda.size(); ++i) g.push_back(lambda(i + 1) - lambda(i));
    return g;
}

std::vector<int> renumber(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

KMeansResult lloyd(const Matrix& x, int k, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding.
    Matrix centers(k, x.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    centers.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    Vector best_d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = best_d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double r = unif(rng) * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= best_d2(i);
                if (r <= 0.0 && best_d2(i) > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0)
                for (Eigen::Index i = n - 1; i >= 0; --i)
                    if (best_d2(i) > 0.0) {
                        pick = i;
                        break;
                    }
        }
        if (pick < 0) {
            // All remaining points coincide with a center: pick any unused row.
            std::vector<Eigen::Index> free;
            for (Eigen::Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
            pick = free[rng() % free.size()];
        }
        chosen[static_cast<std::size_t>(pick)] = 1;
        centers.row(c) = x.row(pick);
        best_d2 = best_d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    for (int iter = 0; iter < kLloydIters; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (x.row(i) - centers.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            // Refill an empty cluster with the point farthest from its center
            // among clusters that can spare one.
            Eigen::Index far = -1;
            double fd = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int l = labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(l)] < 2) continue;
                const double d = (x.row(i) - centers.row(l)).squaredNorm();
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = c;
            ++counts[static_cast<std::size_t>(c)];
            changed = true;
        }

        centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
        for (int c = 0; c < k; ++c) centers.row(c) /= counts[static_cast<std::size_t>(c)];
        if (!changed) break;
    }

    KMeansResult r;
    r.labels = labels;
    for (Eigen::Index i = 0; i < n; ++i)
        r.inertia += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return r;
}

}  // namespace

std::string mode_name(SimilarityMode m) { return m == SimilarityMode::Reverse ? "reverse" : "gaussian"; }

SimilarityMode parse_mode(const std::string& name) {
    if (name == "reverse") return SimilarityMode::Reverse;
    if (name == "gaussian") return SimilarityMode::Gaussian;
    throw InputError("unknown similarity mode '" + name + "' (expected reverse or gaussian)");
}

Matrix similarity_matrix(const Matrix& d, SimilarityMode mode) {
    Matrix s;
    if (mode == SimilarityMode::Reverse) {
        s = (d.maxCoeff() - d.array()).matrix();
    } else {
        const double sigma = median_offdiag(d);
        if (!(sigma > 0.0))
            throw InputError("gaussian similarity: median off-diagonal distance is zero");
        s = (-d.array().square() / (2.0 * sigma * sigma)).exp().matrix();
    }
    s.diagonal().setZero();
    return s;
}

Matrix normalized_laplacian(const Matrix& s, const std::vector<std::string>& names) {
    const Eigen::Index L = s.rows();
    const Vector degree = s.rowwise().sum();
    for (Eigen::Index i = 0; i < L; ++i) {
        if (!(degree(i) > 0.0)) {
            const std::string who = static_cast<std::size_t>(i) < names.size()
                                        ? "'" + names[static_cast<std::size_t>(i)] + "'"
                                        : std::to_string(i);
            throw InputError("similarity graph is disconnected: layer " + who +
                             " has zero degree");
        }
    }
    const Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();
    Matrix lap = -(inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal());
    lap.diagonal().array() += 1.0;
    return 0.5 * (lap + lap.transpose());
}

KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed) {
    if (k < 1 || k > points.rows()) throw InputError("kmeans: k must be in [1, n]");
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        KMeansResult cur = lloyd(points, k, rng);
        if (cur.inertia < best.inertia) best = std::move(cur);
    }
    return best;
}

Partition cluster_layers(const DistanceMatrix& dm, int k, SimilarityMode mode, std::uint64_t seed) {
    const Eigen::Index L = dm.size();
    if (k < 1) throw InputError("cluster: k must be positive");
    if (k > L)
        throw InputError("cluster: k = " + std::to_string(k) + " exceeds layer count " +
                         std::to_string(L));

    Partition p;
    p.k = k;
    p.mode = mode;
    p.measure = dm.measure_tag;
    if (L == 1) {
        p.labels = {0};
        return p;
    }
    const auto eig = spectrum(dm, mode);
    p.eigengaps = gaps_of(eig.eigenvalues());

    Matrix u = eig.eigenvectors().leftCols(k);
    for (Eigen::Index i = 0; i < L; ++i) {
        const double nrm = u.row(i).norm();
        if (nrm > 0.0) u.row(i) /= nrm;
    }
    p.labels = renumber(kmeans(u, k, kKMeansRestarts, seed).labels);
    return p;
}

KSuggestion suggest_k(const DistanceMatrix& dm, SimilarityMode mode) {
    const Eigen::Index L = dm.size();
    if (L < 2) throw InputError("suggest_k: needs at least 2 layers");
    const auto eig = spectrum(dm, mode);
    const Vector lambda = eig.eigenvalues();

    KSuggestion s;
    s.eigengaps = gaps_of(lambda);
    const int hi = static_cast<int>(std::min<Eigen::Index>(L - 1, 8));
    if (hi < 2) {
        s.k = 2;
        s.confidence_ratio = 0.0;
        s.low_confidence = true;
        return s;
    }
    // gap(k) separates the k smallest eigenvalues from the rest.
    auto gap = [&](int k) { return lambda(k) - lambda(k - 1); };
    int best = 2;
    for (int k = 3; k <= hi; ++k)
        if (gap(k) > gap(best)) best = k;

    double rival = gap(1);
    for (int k = 2; k <= hi; ++k)
        if (k != best) rival = std::max(rival, gap(k));
    s.k = best;
    s.confidence_ratio = gap(best) / std::max(rival, std::numeric_limits<double>::min());
    s.low_confidence = s.confidence_ratio < kLowConfidenceRatio;
    return s;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw InputError("ari: label vectors differ in length");
    if (a.size() < 2) return 1.0;
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ca[a[i]] += 1;
        cb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double sum_joint = 0, sum_a = 0, sum_b = 0;
    for (const auto& [key, v] : joint) sum_joint += c2(v);
    for (const auto& [key, v] : ca) sum_a += c2(v);
    for (const auto& [key, v] : cb) sum_b += c2(v);
    const double expected = sum_a * sum_b / c2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both trivial partitions
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace netscope
