#pragma once

// Seeded instances shared by the unit and acceptance suites.

#include "netscope/bundle.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace construct {

using netscope::Matrix;

// One layer holding s = sin(x), target = sin(x)^2 cut into `bins` equal-count
// classes. x = asin(u) with u uniform on [-1, 1], so s itself is uniform and
// the target is an even function of the only feature.
inline netscope::ActivationBundle sin_square(Eigen::Index n, std::uint64_t seed, int bins = 10) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix s(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) s(i, 0) = std::sin(std::asin(u(rng)));
    const Eigen::VectorXd sq = s.col(0).array().square();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sq(a) < sq(b); });
    Matrix labels(n, 1);
    for (std::size_t r = 0; r < order.size(); ++r)
        labels(order[r], 0) = static_cast<double>(r * static_cast<std::size_t>(bins) / order.size());

    auto b = oracle::bundle_of({s});
    b.layers[0].name = "sin";
    b.targets = netscope::Targets{netscope::TargetKind::Class, labels};
    return b;
}

// Layer 1 is layer 0 scaled by `factor`; distances move across shared bins.
inline netscope::ActivationBundle scale_shift(Eigen::Index n, std::uint64_t seed, double factor = 10.0) {
    const Matrix x = oracle::gaussian(n, 4, seed);
    return oracle::bundle_of({x, x * factor});
}

}  // namespace construct
