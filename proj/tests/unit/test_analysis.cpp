#include "netscope/analysis.hpp"
#include "netscope/error.hpp"

#include "constructions.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace netscope;

TEST(Histograms, MassesSumToOneWithSharedEdges) {
    const auto b = oracle::bundle_of({oracle::gaussian(40, 3, 1), oracle::gaussian(40, 3, 2) * 2.0});
    const auto h = distance_histograms(b, 20);
    EXPECT_EQ(h.bin_edges.size(), 21);
    ASSERT_EQ(h.masses.size(), 2u);
    for (const auto& m : h.masses) {
        EXPECT_NEAR(m.sum(), 1.0, 1e-12);
        EXPECT_GE(m.minCoeff(), 0.0);
    }
    for (Eigen::Index i = 1; i < h.bin_edges.size(); ++i) EXPECT_GT(h.bin_edges(i), h.bin_edges(i - 1));
    EXPECT_EQ(h.consecutive_kl.size(), 1);
    EXPECT_NEAR(h.consecutive_kl(0), smoothed_kl(h.masses[1], h.masses[0]), 0.0);
}

TEST(Histograms, IdenticalLayersAndBoundaries) {
    const Matrix x = oracle::gaussian(30, 2, 1);
    const auto h = distance_histograms(oracle::bundle_of({x, x, x}), 10);
    EXPECT_EQ(h.consecutive_kl.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(distance_histograms(oracle::bundle_of({x}), 10).consecutive_kl.size(), 0);
    EXPECT_THROW(distance_histograms(oracle::bundle_of({x}), 1), InputError);
}

TEST(Histograms, ScaleShiftGivesLargeKl) {
    const auto h = distance_histograms(construct::scale_shift(100, 3), 50);
    EXPECT_GT(h.consecutive_kl(0), 1.0);
}

TEST(SmoothedKl, MatchesDirectSum) {
    Vector p(4), q(4);
    p << 0.5, 0.5, 0.0, 0.0;
    q << 0.25, 0.25, 0.25, 0.25;
    const double eps = kHistogramSmoothing;
    double want = 0.0;
    const double zp = 1.0 + 4 * eps, zq = 1.0 + 4 * eps;
    for (int i = 0; i < 4; ++i) {
        const double a = (p(i) + eps) / zp, b = (q(i) + eps) / zq;
        want += a * std::log(a / b);
    }
    EXPECT_NEAR(smoothed_kl(p, q), want, 1e-12);
    EXPECT_EQ(smoothed_kl(p, p), 0.0);
}

TEST(NearestNeighbors, TiesGoToLowerIndex) {
    Matrix x(5, 1);
    x << 0, 1, -1, 2, -2;
    EXPECT_EQ(nearest_neighbors(x, 0, 2), (std::vector<Eigen::Index>{1, 2}));
    EXPECT_EQ(nearest_neighbors(x, 0, 3), (std::vector<Eigen::Index>{1, 2, 3}));
    EXPECT_THROW(nearest_neighbors(x, 0, 5), InputError);
}

TEST(Jaccard, SetArithmetic) {
    EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {2, 3, 4}), 0.5);
    EXPECT_DOUBLE_EQ(jaccard({1}, {1}), 1.0);
    EXPECT_DOUBLE_EQ(jaccard({1}, {2}), 0.0);
}

TEST(NeighborhoodJaccard, IdenticalLayersAreOne) {
    const Matrix x = oracle::gaussian(50, 3, 2);
    const auto t = neighborhood_jaccard(oracle::bundle_of({x, x, x * oracle::orthogonal(3, 1)}), 5, {0, 7, 13, 49}, 0);
    EXPECT_EQ(t.layers, (std::vector<int>{1, 2}));
    EXPECT_LE((t.values.array() - 1.0).abs().maxCoeff(), 0.0);
    EXPECT_LE((t.anchor_means.array() - 1.0).abs().maxCoeff(), 0.0);
}

TEST(NeighborhoodJaccard, UnrelatedLayersDrop) {
    const auto t = neighborhood_jaccard(oracle::bundle_of({oracle::gaussian(200, 3, 1), oracle::gaussian(200, 3, 2)}), 5,
                                        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 0);
    EXPECT_LT(t.anchor_means.mean(), 0.3);
}

TEST(Trajectory, ReadsProvenance) {
    std::vector<ActivationBundle> cps;
    for (int c = 0; c < 3; ++c) {
        const Matrix x = oracle::gaussian(20, 3, 1);
        auto b = oracle::bundle_of({x, x * (1.0 + c), x.array().square().matrix() * static_cast<double>(c)});
        b.provenance["checkpoint"] = "step" + std::to_string(c);
        b.provenance["metric"] = std::to_string(0.5 * c);
        cps.push_back(b);
    }
    const auto pts = trajectory(cps);
    ASSERT_EQ(pts.size(), 3u);
    EXPECT_EQ(pts[1].checkpoint_tag, "step1");
    EXPECT_DOUBLE_EQ(*pts[2].metric, 1.0);
    EXPECT_GT(pts[2].mean_offdiag_gw, pts[0].mean_offdiag_gw);

    cps[1].layers.pop_back();
    EXPECT_THROW(trajectory(cps), InputError);
}
