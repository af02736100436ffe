#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fractal/metric.hpp"
#include "oracles.hpp"

using namespace fractal;

namespace {

constexpr double kSqrt5 = 2.236067977499789696;
constexpr double kSqrt2 = 1.414213562373095049;

PointCloud line(std::initializer_list<double> xs) { return PointCloud(1, std::vector<double>(xs)); }

}  // namespace

TEST(ProductMetric, ThreeFourFive) {
    EXPECT_DOUBLE_EQ(product_metric(ProductPoint({{0.0}, {0.0}}), ProductPoint({{3.0}, {4.0}})), 5.0);
}

TEST(ProductMetric, IdentityIsZero) {
    ProductPoint x({{0.3, -1.0}, {2.0}});
    EXPECT_EQ(product_metric(x, x), 0.0);
}

TEST(ProductMetric, MixedFactorDimensions) {
    EXPECT_NEAR(product_metric(ProductPoint({{0.0, 0.0}, {1.0}}), ProductPoint({{1.0, 0.0}, {3.0}})), kSqrt5, 1e-15);
}

TEST(ProductMetric, StructureMismatchThrows) {
    EXPECT_THROW(product_metric(ProductPoint({{0.0}, {0.0}}), ProductPoint({{0.0, 0.0}, {0.0}})), StructuralError);
    EXPECT_THROW(product_metric(ProductPoint(std::vector<Vector>{{0.0}}), ProductPoint({{0.0}, {0.0}})), StructuralError);
}

TEST(ProductPoint, RejectsNonFinite) {
    EXPECT_THROW(ProductPoint(std::vector<Vector>{{std::nan("")}}), StructuralError);
    EXPECT_THROW(ProductPoint(std::vector<Vector>{}), StructuralError);
}

TEST(PointCloud, Invariants) {
    EXPECT_THROW(PointCloud(1, {}), StructuralError);
    EXPECT_THROW(PointCloud(2, {1.0, 2.0, 3.0}), StructuralError);
    EXPECT_THROW(PointCloud(1, {INFINITY}), StructuralError);
    EXPECT_THROW(PointCloud(1, {0.0}, -1.0), StructuralError);
}

TEST(Hausdorff, Singletons) { EXPECT_EQ(hausdorff_distance(line({0.0}), line({1.0})), 1.0); }

TEST(Hausdorff, IdenticalIsZero) {
    const auto a = line({0.0, 0.5, 0.9});
    EXPECT_EQ(hausdorff_distance(a, a), 0.0);
}

TEST(Hausdorff, PairAgainstSingleton) {
    const auto a = line({0.0, 1.0}), b = line({0.0});
    EXPECT_EQ(hausdorff_distance(a, b), oracle::hausdorff(a, b));
    EXPECT_EQ(hausdorff_distance(a, b), 1.0);
}

TEST(Hausdorff, DimensionMismatchThrows) {
    EXPECT_THROW(hausdorff_distance(line({0.0}), PointCloud(2, {0.0, 0.0})), StructuralError);
}

// The indexed search must agree bit for bit with the quadratic formula.
TEST(Hausdorff, BitIdenticalToBruteForceOnThousandPoints) {
    oracle::Gen gen(7);
    for (std::size_t dim : {1u, 2u, 3u}) {
        for (int rep = 0; rep < 3; ++rep) {
            const auto a = gen.cloud(dim, 1000);
            const auto b = gen.cloud(dim, 1000, -0.2, 1.3);
            EXPECT_EQ(hausdorff_distance(a, b), oracle::hausdorff(a, b)) << "dim " << dim;
            EXPECT_EQ(directed_hausdorff(a, b), oracle::directed(oracle::points(a), oracle::points(b)));
        }
    }
    // Clustered and far-apart clouds stress the ring search and fallback.
    const auto tight = gen.cloud(2, 1000, 0.0, 1e-3);
    const auto spread = gen.cloud(2, 1000, 5.0, 50.0);
    EXPECT_EQ(hausdorff_distance(tight, spread), oracle::hausdorff(tight, spread));
}

TEST(Hausdorff, MetricAxiomsOnRandomTriples) {
    oracle::Gen gen(11);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t dim = gen.index(1, 3);
        const auto a = gen.cloud(dim, gen.index(1, 30));
        const auto b = gen.cloud(dim, gen.index(1, 30));
        const auto c = gen.cloud(dim, gen.index(1, 30));
        const double ab = hausdorff_distance(a, b), ba = hausdorff_distance(b, a);
        EXPECT_EQ(ab, ba);
        EXPECT_LE(hausdorff_distance(a, c), ab + hausdorff_distance(b, c) + 1e-12);
        EXPECT_EQ(hausdorff_distance(a, a), 0.0);
    }
}

TEST(ProductMetric, AxiomsOnRandomTriples) {
    oracle::Gen gen(12);
    auto pick = [&] { return ProductPoint({{gen.uniform(), gen.uniform()}, {gen.uniform()}}); };
    for (int rep = 0; rep < 500; ++rep) {
        const auto x = pick(), y = pick(), z = pick();
        EXPECT_EQ(product_metric(x, y), product_metric(y, x));
        EXPECT_LE(product_metric(x, z), product_metric(x, y) + product_metric(y, z) + 1e-12);
    }
}

TEST(MinDistance, MatchesBruteForce) {
    oracle::Gen gen(13);
    const auto a = gen.cloud(2, 300), b = gen.cloud(2, 300, 2.0, 3.0);
    double best = INFINITY;
    for (const auto& p : oracle::points(a))
        for (const auto& q : oracle::points(b)) best = std::min(best, oracle::dist(p, q));
    EXPECT_EQ(min_distance(a, b), best);
}

TEST(ProductHausdorff, IdenticalIsZero) {
    ProductSet a({line({0.0, 1.0}), line({0.25})});
    EXPECT_EQ(product_hausdorff(a, a), 0.0);
}

TEST(ProductHausdorff, GridsAgainstOrigin) {
    ProductSet a({PointCloud::grid({0.0}, {1.0}, 0.125), PointCloud::grid({0.0}, {1.0}, 0.125)});
    ProductSet b({line({0.0}), line({0.0})});
    const double h1 = oracle::hausdorff(a.factor(0), b.factor(0));
    const double h2 = oracle::hausdorff(a.factor(1), b.factor(1));
    EXPECT_EQ(h1, 1.0);
    EXPECT_NEAR(product_hausdorff(a, b), std::sqrt(h1 * h1 + h2 * h2), 1e-15);
    EXPECT_NEAR(product_hausdorff(a, b), kSqrt2, 1e-15);
}

TEST(ProductHausdorff, SingleFactorCollapsesBitForBit) {
    oracle::Gen gen(14);
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = gen.cloud(2, 40), b = gen.cloud(2, 25);
        EXPECT_EQ(product_hausdorff(ProductSet({a}), ProductSet({b})), hausdorff_distance(a, b));
    }
}

TEST(ProductHausdorff, StructureMismatchThrows) {
    EXPECT_THROW(product_hausdorff(ProductSet({line({0.0})}), ProductSet({line({0.0}), line({0.0})})), StructuralError);
}

TEST(Embed, TwoByTwo) {
    const auto e = embed(ProductSet({line({0.0, 1.0}), line({0.0, 1.0})}));
    EXPECT_TRUE(same_point_set(e, PointCloud(2, {0, 0, 0, 1, 1, 0, 1, 1})));
}

TEST(Embed, SingleFactorIsItself) {
    const auto f = PointCloud(2, {0.1, 0.2, 0.3, 0.4}, 0.01);
    const auto e = embed(ProductSet({f}));
    EXPECT_TRUE(same_point_set(e, f));
    EXPECT_EQ(e.resolution(), 0.01);
}

TEST(Embed, SizeAndResolution) {
    const auto e = embed(ProductSet({PointCloud(1, {0.0}, 0.3), PointCloud(1, {0.0, 1.0, 2.0}, 0.4)}));
    EXPECT_EQ(e.size(), 3u);
    EXPECT_NEAR(e.resolution(), 0.5, 1e-15);
}

TEST(Embed, MatchesCartesianOracle) {
    oracle::Gen gen(15);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<PointCloud> fs;
        const std::size_t m = gen.index(1, 3);
        for (std::size_t k = 0; k < m; ++k) fs.push_back(gen.cloud(gen.index(1, 2), gen.index(1, 6)));
        EXPECT_EQ(oracle::as_set(embed(ProductSet(fs))), oracle::cartesian(fs));
    }
}

TEST(Embed, CapacityError) {
    const auto big = PointCloud::grid({0.0}, {1.0}, 1e-3);
    EXPECT_THROW(embed(ProductSet({big, big}), 1000), CapacityError);
}

TEST(EquivalenceBounds, IdenticalSets) {
    ProductSet a({line({0.0, 0.5}), line({1.0})});
    const auto r = check_equivalence_bounds(a, a);
    EXPECT_EQ(r.h0, 0.0);
    EXPECT_EQ(r.hprime, 0.0);
    EXPECT_TRUE(r.ok());
}

TEST(EquivalenceBounds, GridVersusOrigin) {
    ProductSet a({PointCloud::grid({0.0}, {1.0}, 0.25), PointCloud::grid({0.0}, {1.0}, 0.25)});
    ProductSet b({line({0.0}), line({0.0})});
    const auto r = check_equivalence_bounds(a, b);
    EXPECT_NEAR(r.h0, kSqrt2, 1e-15);
    EXPECT_NEAR(r.hprime, kSqrt2, 1e-15);
    EXPECT_NEAR(r.lower, 1.0, 1e-15);
    EXPECT_TRUE(r.ok());
}

TEST(EquivalenceBounds, RandomizedProductSets) {
    oracle::Gen gen(16);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t m = gen.index(1, 3);
        std::vector<PointCloud> fa, fb;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t d = gen.index(1, 2);
            fa.push_back(gen.cloud(d, gen.index(1, 8)));
            fb.push_back(gen.cloud(d, gen.index(1, 8)));
        }
        const ProductSet a(fa), b(fb);
        const auto r = check_equivalence_bounds(a, b);
        EXPECT_TRUE(r.ok()) << "h0 " << r.h0 << " h' " << r.hprime;
        EXPECT_EQ(r.hprime, oracle::hausdorff(embed(a), embed(b)));
    }
}

TEST(UnionCheck, SingleElement) {
    std::vector<PointCloud> c{line({0.0, 0.3})}, d{line({1.0})};
    const auto r = union_hausdorff_check(c, d);
    EXPECT_EQ(r.lhs, r.rhs);
    EXPECT_TRUE(r.ok);
}

TEST(UnionCheck, TwoPairs) {
    std::vector<PointCloud> c{line({0.0}), line({2.0})}, d{line({1.0}), line({2.0})};
    const auto r = union_hausdorff_check(c, d);
    EXPECT_EQ(r.rhs, 1.0);
    EXPECT_EQ(r.lhs, oracle::hausdorff(oracle::Points{{0.0}, {2.0}}, oracle::Points{{1.0}, {2.0}}));
    EXPECT_TRUE(r.ok);
}

TEST(UnionCheck, IdenticalLists) {
    std::vector<PointCloud> c{line({0.0}), line({2.0, 3.0})};
    const auto r = union_hausdorff_check(c, c);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
}

TEST(UnionCheck, LengthMismatchThrows) {
    std::vector<PointCloud> c{line({0.0})}, d{line({0.0}), line({1.0})};
    EXPECT_THROW(union_hausdorff_check(c, d), StructuralError);
}

TEST(UnionCheck, RandomizedCollections) {
    oracle::Gen gen(17);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<PointCloud> c, d;
        const std::size_t n = gen.index(1, 4);
        for (std::size_t i = 0; i < n; ++i) {
            c.push_back(gen.cloud(2, gen.index(1, 10)));
            d.push_back(gen.cloud(2, gen.index(1, 10)));
        }
        EXPECT_TRUE(union_hausdorff_check(c, d).ok);
    }
}
