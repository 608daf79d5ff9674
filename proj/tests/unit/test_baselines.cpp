#include "netscope/baselines.hpp"
#include "netscope/error.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace netscope;

TEST(Euclidean, Examples) {
    const Matrix a = oracle::gaussian(10, 3, 1);
    EXPECT_EQ(euclidean_layer_distance(a, a), 0.0);
    Vector t(3);
    t << 1, -2, 2;
    EXPECT_NEAR(euclidean_layer_distance(a, a.rowwise() + t.transpose()), 3.0, 1e-12);
    Matrix x(2, 2), y(2, 2);
    x << 0, 0, 1, 1;
    y << 3, 4, 1, 1;
    EXPECT_DOUBLE_EQ(euclidean_layer_distance(x, y), 2.5);
    EXPECT_THROW(euclidean_layer_distance(x, Matrix::Zero(2, 3)), InputError);
}

TEST(Cosine, Examples) {
    const Matrix a = oracle::gaussian(10, 4, 2);
    EXPECT_NEAR(cosine_layer_distance(a, 3.0 * a), 0.0, 1e-12);
    EXPECT_NEAR(cosine_layer_distance(a, -a), 2.0, 1e-12);
    Matrix x(2, 2), y(2, 2);
    x << 1, 0, 0, 2;
    y << 0, 5, 3, 0;
    EXPECT_NEAR(cosine_layer_distance(x, y), 1.0, 1e-12);
    EXPECT_THROW(cosine_layer_distance(x, Matrix::Zero(2, 2)), InputError);
}

TEST(Rsm, Examples) {
    const Matrix a = oracle::gaussian(12, 5, 3);
    EXPECT_NEAR(rsm_distance(a, a * oracle::orthogonal(5, 4)), 0.0, 1e-12);
    Matrix x(2, 1), y(2, 1);
    x << 0, 1;
    y << 0, 3;
    EXPECT_NEAR(rsm_distance(x, y), std::sqrt(8.0) / 2.0, 1e-12);

    std::vector<int> p = oracle::identity_perm(12);
    std::shuffle(p.begin(), p.end(), std::mt19937_64(5));
    Matrix permuted(12, 5);
    for (int i = 0; i < 12; ++i) permuted.row(i) = a.row(p[static_cast<std::size_t>(i)]);
    EXPECT_GT(rsm_distance(a, permuted), 0.1);

    const Matrix b = oracle::gaussian(12, 2, 6);
    EXPECT_NEAR(rsm_distance(a, b), (oracle::distances(a) - oracle::distances(b)).norm() / 12.0, 1e-9);
}

TEST(Rsa, MatchesIndependentPearson) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = oracle::gaussian(16, 3, seed);
        const Matrix b = oracle::gaussian(16, 7, seed + 40);
        const double r = oracle::pearson_upper(oracle::distances(a), oracle::distances(b));
        EXPECT_NEAR(rsa_distance(a, b), 1.0 - r, 1e-12);
    }
}

TEST(Rsa, ScaleAndAntiCorrelation) {
    const Matrix a = oracle::gaussian(16, 3, 1);
    EXPECT_NEAR(rsa_distance(a, 2.0 * a), 0.0, 1e-12);
    Matrix x(3, 1), y(3, 1);
    x << 0, 1, 3;  // pair distances 1, 3, 2
    y << 0, 3, 1;  // pair distances 3, 1, 2
    EXPECT_NEAR(rsa_distance(x, y), 2.0, 1e-12);
    EXPECT_THROW(rsa_distance(Matrix::Zero(5, 2), a.topRows(5)), InputError);
}

TEST(Cka, MatchesHsicOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = oracle::gaussian(30, 4, seed);
        const Matrix b = oracle::gaussian(30, 9, seed + 20).array().tanh().matrix();
        EXPECT_NEAR(cka_similarity(a, b), oracle::cka_hsic(a, b), 1e-12);
    }
}

TEST(Cka, Invariances) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = oracle::gaussian(50, 6, seed);
        const double s = 0.1 + static_cast<double>(seed);
        const Matrix b = (s * a * oracle::orthogonal(6, seed + 1)).rowwise() + oracle::gaussian(1, 6, seed + 2).row(0) * 10.0;
        EXPECT_NEAR(cka_similarity(a, b), 1.0, 1e-9);
        EXPECT_NEAR(cka_distance(a, a), 0.0, 1e-12);
    }
}

TEST(Cca, MatchesQrOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = oracle::gaussian(40, 3, seed);
        const Matrix b = oracle::gaussian(40, 5, seed + 10) + a * oracle::gaussian(3, 5, seed + 11);
        const Vector got = canonical_correlations(a, b);
        const Vector want = oracle::canonical_correlations_qr(a, b);
        ASSERT_EQ(got.size(), want.size());
        EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Cca, InvertibleMapIsZero) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix a = oracle::gaussian(60, 5, seed);
        Matrix m = oracle::gaussian(5, 5, seed + 1);
        m.diagonal().array() += 3.0;
        EXPECT_LE(cca_distance(a, a * m), 1e-6);
    }
    Matrix col = oracle::gaussian(20, 1, 3);
    EXPECT_LE(cca_distance(col, col), 1e-9);
}

TEST(Cca, IndependentInputsAreFar) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        total += cca_distance(oracle::gaussian(500, 4, seed), oracle::gaussian(500, 4, seed + 1000));
    EXPECT_GT(total / 50.0, 0.5);
}

TEST(Cca, RankLimit) {
    const Vector rho = canonical_correlations(oracle::gaussian(4, 6, 1), oracle::gaussian(4, 8, 2));
    EXPECT_EQ(rho.size(), 3);
    EXPECT_GE(rho.minCoeff(), 0.0);
    EXPECT_LE(rho.maxCoeff(), 1.0);
}
