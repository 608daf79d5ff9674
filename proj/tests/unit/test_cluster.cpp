#include "netscope/cluster.hpp"
#include "netscope/error.hpp"
#include "netscope/synth.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace netscope;

namespace {

DistanceMatrix blocks(const std::vector<int>& sizes, double within, double cross) {
    std::vector<int> label;
    for (std::size_t b = 0; b < sizes.size(); ++b) label.insert(label.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
    const auto L = static_cast<Eigen::Index>(label.size());
    DistanceMatrix dm;
    dm.values.resize(L, L);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < L; ++j)
            dm.values(i, j) = i == j ? 0.0 : (label[static_cast<std::size_t>(i)] == label[static_cast<std::size_t>(j)] ? within : cross);
    for (Eigen::Index i = 0; i < L; ++i) dm.layer_names.push_back("l" + std::to_string(i));
    dm.measure_tag = "gw";
    return dm;
}

}  // namespace

TEST(Cluster, BlockDiagonalEightFour) {
    const auto p = cluster_layers(blocks({8, 4}, 0.1, 1.0), 2);
    std::vector<int> expect(8, 0);
    expect.insert(expect.end(), 4, 1);
    EXPECT_EQ(p.labels, expect);
    EXPECT_EQ(p.k, 2);
    EXPECT_EQ(p.eigengaps.size(), 11u);
}

TEST(Cluster, AllEqualDistancesSucceed) {
    const auto dm = blocks({6}, 1.0, 1.0);
    const auto p = cluster_layers(dm, 2, SimilarityMode::Gaussian, 3);
    EXPECT_EQ(std::set<int>(p.labels.begin(), p.labels.end()).size(), 2u);
    const auto s = suggest_k(dm, SimilarityMode::Gaussian);
    EXPECT_EQ(s.k, 2);
    EXPECT_TRUE(s.low_confidence);
    EXPECT_LT(s.confidence_ratio, kLowConfidenceRatio);
}

TEST(Cluster, ReverseModeZeroDegreeNamesLayer) {
    DistanceMatrix dm = blocks({2, 2}, 0.5, 0.5);
    dm.values.row(3).setConstant(1.0);
    dm.values.col(3).setConstant(1.0);
    dm.values(3, 3) = 0.0;
    try {
        cluster_layers(dm, 2);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("'l3'"), std::string::npos) << e.what();
    }
}

TEST(Cluster, Errors) {
    EXPECT_THROW(cluster_layers(blocks({2, 2}, 0.1, 1.0), 5), InputError);
    EXPECT_THROW(parse_mode("knn"), InputError);
    DistanceMatrix asym = blocks({2, 2}, 0.1, 1.0);
    asym.values(0, 1) = 0.3;
    EXPECT_THROW(cluster_layers(asym, 2), InputError);
}

TEST(SuggestK, CleanBlocks) {
    EXPECT_EQ(suggest_k(blocks({5, 5}, 0.05, 1.0)).k, 2);
    EXPECT_EQ(suggest_k(blocks({4, 4, 4}, 0.05, 1.0)).k, 3);
    EXPECT_FALSE(suggest_k(blocks({4, 4, 4}, 0.05, 1.0)).low_confidence);
}

TEST(Cluster, PlantedRecoveryAcrossSeeds) {
    for (int blocks_n : {2, 3}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto pb = gen_planted(planted_spec(blocks_n, 3, 48, 6, TransformKind::Orthogonal, seed));
            const auto dm = distance_matrix(pb.bundle, Measure::Gw);
            const auto p = cluster_layers(dm, blocks_n, SimilarityMode::Reverse, seed);
            EXPECT_GE(adjusted_rand_index(p.labels, pb.ground_truth.labels), 0.99);
        }
    }
}

TEST(SuggestK, PlantedBlockCount) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto two = gen_planted(planted_spec(2, 3, 48, 6, TransformKind::Orthogonal, seed));
        EXPECT_EQ(suggest_k(distance_matrix(two.bundle, Measure::Gw)).k, 2);
        const auto three = gen_planted(planted_spec(3, 3, 48, 6, TransformKind::Orthogonal, seed, Nonlinearity::Sine));
        EXPECT_EQ(suggest_k(distance_matrix(three.bundle, Measure::Gw)).k, 3);
    }
}

// Squares compound along the chain, so block 0 sits much farther from block 2
// than from block 1 and the reverse similarity keeps neighbours linked.
TEST(SuggestK, SquareChainMergesNeighbours) {
    const auto pb = gen_planted(planted_spec(3, 3, 48, 6, TransformKind::Orthogonal, 0));
    const auto dm = distance_matrix(pb.bundle, Measure::Gw);
    EXPECT_GT(dm.values(0, 6), dm.values(0, 3));
    EXPECT_GE(adjusted_rand_index(cluster_layers(dm, 3).labels, pb.ground_truth.labels), 0.99);
}

TEST(Cluster, LabelsRenumberedByFirstAppearanceAndDeterministic) {
    const auto dm = blocks({3, 3, 3}, 0.1, 1.0);
    const auto a = cluster_layers(dm, 3, SimilarityMode::Reverse, 1);
    const auto b = cluster_layers(dm, 3, SimilarityMode::Reverse, 1);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2}));
}

TEST(Ari, MatchesPairCountingOracle) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 15;
        std::uniform_int_distribution<int> ka(0, 1 + t % 4), kb(0, 1 + (t / 3) % 4);
        std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = ka(rng);
            b[static_cast<std::size_t>(i)] = kb(rng);
        }
        EXPECT_NEAR(adjusted_rand_index(a, b), oracle::ari_pairs(a, b), 1e-12) << t;
    }
    EXPECT_EQ(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}), 1.0);
    EXPECT_EQ(adjusted_rand_index({0}, {0}), 1.0);
}

TEST(KMeans, SeparatedClouds) {
    Matrix pts(30, 2);
    const Matrix noise = oracle::gaussian(30, 2, 1) * 0.05;
    for (int i = 0; i < 30; ++i) pts.row(i) << (i % 3) * 10.0, (i % 3 == 1) * 5.0;
    pts += noise;
    const auto r = kmeans(pts, 3, 20, 4);
    for (int i = 3; i < 30; ++i) EXPECT_EQ(r.labels[static_cast<std::size_t>(i)], r.labels[static_cast<std::size_t>(i % 3)]);
    EXPECT_EQ(std::set<int>(r.labels.begin(), r.labels.end()).size(), 3u);
}

TEST(Laplacian, SpectrumInUnitRange) {
    const Matrix s = similarity_matrix(blocks({3, 4}, 0.2, 0.9).values, SimilarityMode::Gaussian);
    EXPECT_EQ(s.diagonal().cwiseAbs().maxCoeff(), 0.0);
    const Matrix lap = normalized_laplacian(s);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
    EXPECT_NEAR(eig.eigenvalues()(0), 0.0, 1e-12);
    EXPECT_LE(eig.eigenvalues().maxCoeff(), 2.0 + 1e-12);
}
