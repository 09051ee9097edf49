#include "doctest.h"

#include "polypcount/clustering.hpp"
#include "reference/naive_agglomerative.hpp"
#include "test_util.hpp"

using namespace polypcount;
using namespace polypcount::test;

TEST_CASE("cutoff below the closest pair keeps singletons") {
    const auto m = matrix_of({{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}});
    const auto a = cluster_agglomerative(m, Linkage::single, 0.5);
    CHECK(a.cluster_count() == 3);
}

TEST_CASE("cutoff at the farthest pair with single linkage joins everything") {
    const auto m = matrix_of({{0.0, 0.0}, {1.0, 0.0}, {2.5, 0.0}, {9.0, 1.0}});
    double d_max = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            d_max = std::max(d_max, m.D.at(i, j));
    const auto a = cluster_agglomerative(m, Linkage::single, d_max);
    CHECK(a.cluster_count() == 1);
}

TEST_CASE("agglomerative matches the naive reference on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 10));
        auto points = random_points(rng, n, 3);
        // sprinkle duplicates to exercise tie handling
        if (n >= 4 && rng.uniform01() < 0.3) points[1] = points[0];
        const auto m = matrix_of(points);
        const double cutoff = rng.uniform01() * 3.0;
        for (Linkage linkage : {Linkage::single, Linkage::complete, Linkage::average}) {
            const auto fast = cluster_agglomerative(m, linkage, cutoff);
            const auto naive = reference::naive_agglomerative(m.D, linkage, cutoff);
            CHECK(canonical_partition(fast, m.tracklet_ids) == naive);
        }
    }
}

TEST_CASE("single linkage at cutoff equals connected components of the D <= t graph") {
    Rng rng(2025);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 28));
        const auto m = matrix_of(random_points(rng, n, 3));
        const double t = rng.uniform01() * 2.0;

        const auto agglo = cluster_agglomerative(m, Linkage::single, t);

        // components of the threshold graph, via the threshold op on a fake
        // "similarity" built from D <= t
        Matrix S(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) S.at(i, j) = m.D.at(i, j) <= t ? 1.0 : 0.0;
        SimilarityMatrix g;
        g.tracklet_ids = m.tracklet_ids;
        g.D = m.D;
        g.S = S;
        g.has_distances = g.has_similarities = true;
        const auto components = cluster_threshold(g, 1.0);

        CHECK(canonical_partition(agglo, m.tracklet_ids) ==
              canonical_partition(components, g.tracklet_ids));
    }
}
