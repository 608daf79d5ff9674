#include "netscope/error.hpp"
#include "netscope/gw.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace netscope;

namespace {

IntraDistances dist(const Matrix& x) { return pairwise_distances(x); }

GwResult solve(const Matrix& d1, const Matrix& d2, const GwConfig& cfg = {}) {
    return gw_distance({d1}, {d2}, uniform_weights(d1.rows()), uniform_weights(d2.rows()), cfg);
}

void expect_monotone(const std::vector<double>& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) ASSERT_LE(trace[i], trace[i - 1]) << "step " << i;
}

Matrix permute_rows(const Matrix& a, std::uint64_t seed) {
    std::vector<int> p = oracle::identity_perm(static_cast<int>(a.rows()));
    std::shuffle(p.begin(), p.end(), std::mt19937_64(seed));
    Matrix out(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) out.row(i) = a.row(p[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

TEST(Gw, SelfDistanceIsZero) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::Index n = seed % 2 ? 16 : 64;
        const Eigen::Index d = seed % 4 < 2 ? 4 : 128;
        const Matrix a = oracle::gaussian(n, d, seed);
        EXPECT_LE(gw_layer_distance(a, a), 1e-8);
    }
}

TEST(Gw, PermutedSpaceIsZero) {
    const Matrix a = oracle::gaussian(40, 6, 3);
    const auto r = solve(dist(a).matrix, dist(permute_rows(a, 9)).matrix, {1000, 1e-9, 4, 1});
    EXPECT_LE(r.distance_sq, 1e-8);
}

TEST(Gw, OneDimensionalExampleMatchesBruteForce) {
    Matrix x(3, 1), y(3, 1);
    x << 0, 1, 2;
    y << 0, 1, 3;
    const Matrix d1 = dist(x).matrix, d2 = dist(y).matrix;
    const auto r = solve(d1, d2);
    EXPECT_NEAR(r.distance_sq, oracle::gw_permutation_min(d1, d2), 1e-12);
}

TEST(Gw, ObjectiveMatchesTensorContraction) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix d1 = dist(oracle::gaussian(6, 2, seed)).matrix;
        const Matrix d2 = dist(oracle::gaussian(5, 3, seed + 50)).matrix;
        Matrix pi = oracle::uniform(6, 5, seed + 99, 0.1, 1.0);
        pi /= pi.sum();
        EXPECT_NEAR(gw_objective(d1, d2, pi), oracle::gw_objective_tensor(d1, d2, pi), 1e-12);
    }
}

// Frank-Wolfe ends at a point where no vertex improves the linearization.
// With uniform marginals the vertices are permutations, so the gap can be
// checked exhaustively.
TEST(Gw, EndsAtAStationaryPoint) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index n = 2 + t % 6;
        const Matrix d1 = dist(oracle::gaussian(n, 2, rng())).matrix;
        const Matrix d2 = dist(oracle::gaussian(n, 3, rng())).matrix;
        const auto r = solve(d1, d2, {1000, 1e-9, 8, static_cast<std::uint64_t>(t)});
        const Matrix& pi = r.coupling.matrix;
        const Matrix g = d1 * pi * d2;
        auto p = oracle::identity_perm(static_cast<int>(n));
        double best = -std::numeric_limits<double>::infinity();
        do {
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) s += g(i, p[static_cast<std::size_t>(i)]);
            best = std::max(best, s / static_cast<double>(n));
        } while (std::next_permutation(p.begin(), p.end()));
        EXPECT_LE(best - (g.array() * pi.array()).sum(), 1e-10) << "instance " << t;
        EXPECT_NEAR(r.distance_sq, oracle::gw_objective_tensor(d1, d2, pi), 1e-10);
        expect_monotone(r.objective_trace);
        if (n <= 3) EXPECT_NEAR(r.distance_sq, oracle::gw_permutation_min(d1, d2), 1e-9) << "instance " << t;
    }
}

TEST(Gw, CouplingIsFeasible) {
    const Matrix d1 = dist(oracle::gaussian(12, 3, 1)).matrix;
    const Matrix d2 = dist(oracle::gaussian(9, 5, 2)).matrix;
    const auto r = solve(d1, d2, {1000, 1e-9, 2, 3});
    const Matrix& pi = r.coupling.matrix;
    EXPECT_GE(pi.minCoeff(), 0.0);
    EXPECT_LE((pi.rowwise().sum() - uniform_weights(12).vector).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((pi.colwise().sum().transpose() - uniform_weights(9).vector).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gw, IsometryAndPermutationInvariance) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 32, d = 6;
        const Matrix a = oracle::gaussian(n, d, seed);
        Matrix b = a * oracle::orthogonal(d, seed + 7);
        b = b.rowwise() + oracle::gaussian(1, d, seed + 8).row(0) * 5.0;
        b = permute_rows(b, seed + 9);
        Matrix padded = Matrix::Zero(n, 2 * d);
        padded.leftCols(d) = b;
        GwConfig cfg;
        cfg.restarts = 4;
        cfg.seed = seed;
        EXPECT_LE(gw_layer_distance(a, padded, cfg), 1e-4) << "seed " << seed;
    }
}

TEST(Gw, ZeroPaddingAndNonIsometricMap) {
    Matrix grid(40, 1);
    for (Eigen::Index i = 0; i < 40; ++i) grid(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 39.0;
    Matrix padded = Matrix::Zero(40, 2);
    padded.col(0) = grid.col(0);
    const double iso = gw_layer_distance(grid, padded);
    const double sq = gw_layer_distance(grid, grid.array().square().matrix());
    EXPECT_LE(iso, 1e-6);
    EXPECT_GT(sq, 0.0);
    EXPECT_GT(sq, 10.0 * iso);
}

TEST(Gw, CommonScalingLaw) {
    const Matrix a = oracle::gaussian(24, 4, 1);
    const Matrix b = oracle::gaussian(24, 7, 2).array().square().matrix();
    const double base = solve(dist(a).matrix, dist(b).matrix).distance_sq;
    for (double alpha : {0.5, 3.0, 10.0}) {
        const double scaled = solve(dist(a * alpha).matrix, dist(b * alpha).matrix).distance_sq;
        EXPECT_NEAR(scaled / (alpha * alpha * base), 1.0, 1e-6);
    }
}

TEST(Gw, IdentityCouplingBound) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix d1 = dist(oracle::gaussian(20, 3, seed)).matrix;
        const Matrix d2 = dist(oracle::gaussian(20, 5, seed + 30).array().cube().matrix()).matrix;
        const Matrix identity = Matrix::Identity(20, 20) / 20.0;
        EXPECT_LE(solve(d1, d2).distance_sq, gw_objective(d1, d2, identity) + 1e-12);
        EXPECT_NEAR(gw_objective(d1, d2, identity), (d1 - d2).squaredNorm() / 400.0, 1e-12);
    }
}

TEST(Gw, TraceIsMonotoneAcrossSizes) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::Index n = 10 + static_cast<Eigen::Index>(seed) * 9;
        const auto r = solve(dist(oracle::gaussian(n, 3, seed)).matrix,
                             dist(oracle::gaussian(n, 8, seed + 1).array().sin().matrix()).matrix,
                             {1000, 1e-9, 2, seed});
        expect_monotone(r.objective_trace);
        EXPECT_NEAR(r.objective_trace.back(), r.distance_sq, 1e-9 * std::max(1.0, r.distance_sq));
    }
}

TEST(Gw, DegenerateSpaceUsesProductCoupling) {
    const Matrix d2 = dist(oracle::gaussian(4, 2, 1)).matrix;
    const auto r = solve(Matrix::Zero(3, 3), d2);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.distance_sq, oracle::gw_objective_tensor(Matrix::Zero(3, 3), d2, r.coupling.matrix), 1e-12);
}

TEST(Gw, ConfigAndInputValidation) {
    GwConfig bad;
    bad.max_iters = 0;
    EXPECT_THROW(bad.validate(), InputError);
    bad = {};
    bad.rel_tol = 0.0;
    EXPECT_THROW(bad.validate(), InputError);
    bad = {};
    bad.restarts = -1;
    EXPECT_THROW(bad.validate(), InputError);
    EXPECT_THROW(gw_layer_distance(Matrix::Zero(3, 2), Matrix::Zero(4, 2)), InputError);
    EXPECT_THROW(gw_distance({Matrix::Zero(3, 3)}, {Matrix::Zero(3, 3)}, uniform_weights(2), uniform_weights(3)),
                 InputError);
}

TEST(Gw, RestartsAreSeedDeterministic) {
    const Matrix d1 = dist(oracle::gaussian(15, 2, 4)).matrix;
    const Matrix d2 = dist(oracle::gaussian(15, 2, 5)).matrix;
    const auto r1 = solve(d1, d2, {1000, 1e-9, 3, 77});
    const auto r2 = solve(d1, d2, {1000, 1e-9, 3, 77});
    EXPECT_EQ(r1.distance_sq, r2.distance_sq);
    EXPECT_EQ(r1.coupling.matrix, r2.coupling.matrix);
}
