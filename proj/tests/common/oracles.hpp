#pragma once

// Slow, independent reference implementations used only by the tests.

#include "netscope/bundle.hpp"
#include "netscope/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using netscope::Matrix;
using netscope::Vector;

inline Matrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = g(rng);
    return m;
}

inline Matrix uniform(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
    return m;
}

// Plain double loop, no Gram trick.
inline Matrix distances(const Matrix& x) {
    const Eigen::Index n = x.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double t = x(i, c) - x(k, c);
                s += t * t;
            }
            d(i, k) = std::sqrt(s);
        }
    return d;
}

// Haar-ish orthogonal matrix via Gram-Schmidt on Gaussian columns.
inline Matrix orthogonal(Eigen::Index d, std::uint64_t seed) {
    Matrix q = gaussian(d, d, seed);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
        q.col(j) /= q.col(j).norm();
    }
    return q;
}

inline std::vector<int> identity_perm(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    return p;
}

// min over permutations of sum_i cost(i, p(i)) / n.
inline double assignment_min(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    auto p = identity_perm(n);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += cost(i, p[static_cast<std::size_t>(i)]);
        best = std::min(best, s);
    } while (std::next_permutation(p.begin(), p.end()));
    return best / n;
}

// Quadratic objective at the permutation coupling pi_{i,p(i)} = 1/n.
inline double gw_at_permutation(const Matrix& d1, const Matrix& d2, const std::vector<int>& p) {
    const auto n = static_cast<Eigen::Index>(p.size());
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double t = d1(i, k) - d2(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(k)]);
            s += t * t;
        }
    return s / static_cast<double>(n * n);
}

inline double gw_permutation_min(const Matrix& d1, const Matrix& d2) {
    auto p = identity_perm(static_cast<int>(d1.rows()));
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, gw_at_permutation(d1, d2, p));
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

// Four nested loops over the full coupling.
inline double gw_objective_tensor(const Matrix& d1, const Matrix& d2, const Matrix& pi) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pi.rows(); ++i)
        for (Eigen::Index j = 0; j < pi.cols(); ++j) {
            if (pi(i, j) == 0.0) continue;
            for (Eigen::Index k = 0; k < pi.rows(); ++k)
                for (Eigen::Index l = 0; l < pi.cols(); ++l) {
                    const double t = d1(i, k) - d2(j, l);
                    s += t * t * pi(i, j) * pi(k, l);
                }
        }
    return s;
}

// Two-pass Pearson correlation over index pairs i < j.
inline double pearson_upper(const Matrix& a, const Matrix& b) {
    std::vector<double> x, y;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            x.push_back(a(i, j));
            y.push_back(b(i, j));
        }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// Linear CKA through HSIC of centered Gram matrices.
inline double cka_hsic(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    const Matrix h = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    const Matrix k = h * (a * a.transpose()) * h;
    const Matrix l = h * (b * b.transpose()) * h;
    const double kl = (k.array() * l.array()).sum();
    const double kk = (k.array() * k.array()).sum();
    const double ll = (l.array() * l.array()).sum();
    return kl / std::sqrt(kk * ll);
}

// Canonical correlations from Householder QR bases of the centered inputs.
inline Vector canonical_correlations_qr(const Matrix& a, const Matrix& b) {
    const Matrix ac = a.rowwise() - a.colwise().mean();
    const Matrix bc = b.rowwise() - b.colwise().mean();
    Eigen::HouseholderQR<Matrix> qa(ac), qb(bc);
    const Matrix ua = qa.householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix ub = qb.householderQ() * Matrix::Identity(b.rows(), b.cols());
    Eigen::BDCSVD<Matrix> svd(ua.transpose() * ub);
    const Eigen::Index k = std::min({a.cols(), b.cols(), a.rows() - 1});
    return svd.singularValues().head(k).cwiseMin(1.0);
}

// Hubert-Arabie ARI from raw pair counts.
inline double ari_pairs(const std::vector<int>& x, const std::vector<int>& y) {
    double ss = 0, sd = 0, ds = 0, dd = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const bool a = x[i] == x[j], b = y[i] == y[j];
            if (a && b) ++ss;
            else if (a) ++sd;
            else if (b) ++ds;
            else ++dd;
        }
    const double den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if (den == 0.0) return 1.0;
    return 2.0 * (ss * dd - sd * ds) / den;
}

inline netscope::ActivationBundle bundle_of(const std::vector<Matrix>& layers, const std::string& model = "test") {
    netscope::ActivationBundle b;
    b.model_name = model;
    for (std::size_t i = 0; i < layers.size(); ++i)
        b.layers.push_back({static_cast<int>(i), "layer" + std::to_string(i), layers[i]});
    b.sample_ids = netscope::default_sample_ids(layers.front().rows());
    return b;
}

}  // namespace oracle
