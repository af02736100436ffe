#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fractal/fif.hpp"
#include "oracles.hpp"

using namespace fractal;

namespace {

InterpolationData tent() { return InterpolationData({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}); }

InterpolationData five_knots() { return InterpolationData({0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 0.6, 0.3, 0.9, 0.5}); }

// Random data with strictly increasing knots.
InterpolationData random_knots(oracle::Gen& gen, std::size_t n) {
    std::vector<double> x{gen.uniform(-2.0, 2.0)}, y{gen.uniform(-1.0, 1.0)};
    for (std::size_t i = 0; i < n; ++i) {
        x.push_back(x.back() + gen.uniform(0.05, 1.0));
        y.push_back(gen.uniform(-1.0, 1.0));
    }
    return InterpolationData(x, y);
}

std::vector<double> random_alphas(oracle::Gen& gen, std::size_t n, double bound = 0.9) {
    std::vector<double> a(n);
    for (auto& v : a) v = gen.uniform(-bound, bound);
    return a;
}

SampledFunction random_pinned(oracle::Gen& gen, const FifMaps& maps, std::size_t m) {
    std::vector<double> v(m + 1);
    for (auto& s : v) s = gen.uniform(-3.0, 3.0);
    v.front() = maps.y0();
    v.back() = maps.yN();
    return SampledFunction(maps.x0(), maps.xN(), v);
}

// Piecewise-linear interpolation of the knots at x.
double pl(const InterpolationData& d, double x) {
    for (std::size_t i = 1; i < d.x.size(); ++i)
        if (x <= d.x[i]) return d.y[i - 1] + (d.y[i] - d.y[i - 1]) * (x - d.x[i - 1]) / (d.x[i] - d.x[i - 1]);
    return d.y.back();
}

}  // namespace

TEST(InterpolationData, RejectsBadKnots) {
    EXPECT_THROW(InterpolationData({0.0}, {0.0}), StructuralError);
    EXPECT_THROW(InterpolationData({0.0, 1.0}, {0.0}), StructuralError);
    EXPECT_THROW(InterpolationData({0.0, 0.0}, {0.0, 1.0}), StructuralError);
    EXPECT_THROW(InterpolationData({1.0, 0.0}, {0.0, 1.0}), StructuralError);
}

TEST(FifMaps, UniformKnotsHalveTheInterval) {
    const auto maps = build_fif_maps(tent(), {0.3, 0.3});
    ASSERT_EQ(maps.intervals(), 2u);
    for (const auto& p : maps.pieces) EXPECT_DOUBLE_EQ(p.a, 0.5);
}

TEST(FifMaps, EndpointConditionsOnDiagonalData) {
    const InterpolationData d({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0});
    const auto maps = build_fif_maps(d, {0.3, 0.3});
    for (std::size_t n = 1; n <= 2; ++n) {
        const auto& p = maps.pieces[n - 1];
        EXPECT_NEAR(p.L(0.0), d.x[n - 1], 1e-12);
        EXPECT_NEAR(p.L(1.0), d.x[n], 1e-12);
        EXPECT_NEAR(p.F(0.0, 0.0), d.y[n - 1], 1e-12);
        EXPECT_NEAR(p.F(1.0, 1.0), d.y[n], 1e-12);
    }
}

TEST(FifMaps, CoefficientsMatchCramerSolve) {
    oracle::Gen gen(61);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = random_knots(gen, gen.index(2, 8));
        const auto alphas = random_alphas(gen, d.intervals());
        const auto maps = build_fif_maps(d, alphas);
        const double lo = d.x.front(), hi = d.x.back(), ylo = d.y.front(), yhi = d.y.back();
        for (std::size_t n = 1; n <= d.intervals(); ++n) {
            // [lo 1; hi 1] [c; e] = [y_{n-1} - alpha ylo; y_n - alpha yhi]
            const double r0 = d.y[n - 1] - alphas[n - 1] * ylo, r1 = d.y[n] - alphas[n - 1] * yhi;
            const double det = lo - hi;
            const double c = (r0 - r1) / det, e = (lo * r1 - hi * r0) / det;
            const auto& p = maps.pieces[n - 1];
            EXPECT_NEAR(p.c, c, 1e-12 * std::max(1.0, std::abs(c)));
            EXPECT_NEAR(p.e, e, 1e-11 * std::max(1.0, std::abs(e)));
            EXPECT_NEAR(p.a, (d.x[n] - d.x[n - 1]) / (hi - lo), 1e-15);
            EXPECT_EQ(p.alpha, alphas[n - 1]);
        }
    }
}

TEST(FifMaps, RejectsNonContractiveScaling) {
    EXPECT_THROW(build_fif_maps(tent(), {1.0, 0.0}), ContractError);
    EXPECT_THROW(build_fif_maps(tent(), {0.0, -1.2}), ContractError);
    EXPECT_THROW(build_fif_maps(tent(), {0.5}), StructuralError);
}

TEST(Theta, BoundaryCaseIsShrunk) {
    const auto r = theta_and_contraction({0.5, 0.5}, {0.25, 0.25}, {0.3, 0.3});
    EXPECT_TRUE(r.adjusted);
    EXPECT_NEAR(r.theta, 2.0 * (1.0 - 1e-6), 1e-12);
    EXPECT_LT(r.a, 1.0);
    EXPECT_NEAR(r.a, 1.0, 1e-6);
    EXPECT_EQ(r.b, 0.3);
    EXPECT_EQ(r.lambda, r.a);
}

TEST(Theta, SmallerXCouplingAlsoHitsBoundary) {
    const auto r = theta_and_contraction({0.5, 0.5}, {0.125, 0.125}, {0.3, 0.3});
    EXPECT_TRUE(r.adjusted);
    EXPECT_NEAR(r.theta, 4.0 * (1.0 - 1e-6), 1e-12);
    EXPECT_LT(r.a, 1.0);
}

TEST(Theta, NoXCoupling) {
    const auto r = theta_and_contraction({0.5, 0.25}, {0.0, 0.0}, {0.7, 0.1});
    EXPECT_EQ(r.theta, 1.0);
    EXPECT_FALSE(r.note.empty());
    EXPECT_EQ(r.a, 0.5);
    EXPECT_EQ(r.lambda, 0.7);
}

TEST(Theta, HeterogeneousRecordsPlugIn) {
    const auto r = theta_and_contraction({0.25, 0.5}, {1.0, 0.5}, {0.2, 0.4});
    // theta = min(0.75, 0.5) / 1 = 0.5; a = max(0.25 + 0.5, 0.5 + 0.25) = 0.75
    EXPECT_FALSE(r.adjusted);
    EXPECT_DOUBLE_EQ(r.theta, 0.5);
    EXPECT_DOUBLE_EQ(r.a, 0.75);
    EXPECT_DOUBLE_EQ(r.lambda, 0.75);
}

TEST(Theta, LambdaBelowOneForRandomMaps) {
    oracle::Gen gen(62);
    for (int rep = 0; rep < 200; ++rep) {
        const auto d = random_knots(gen, gen.index(2, 10));
        const auto maps = build_fif_maps(d, random_alphas(gen, d.intervals(), 0.99));
        const auto r = theta_and_contraction(maps);
        EXPECT_LT(r.lambda, 1.0);
        EXPECT_GT(r.theta, 0.0);
    }
}

TEST(Theta, SingleIntervalIsNotContractive) {
    EXPECT_THROW(theta_and_contraction(build_fif_maps(InterpolationData({0.0, 1.0}, {0.0, 1.0}), {0.5})), ContractError);
}

TEST(FixedPoint, SelfAffineEvaluationMatchesSamplesOnGrid) {
    const auto maps = build_fif_maps(five_knots(), {0.4, -0.3, 0.2, 0.5});
    const auto run = fif_fixed_point(maps, 4096, 1e-12);
    for (std::size_t i = 0; i <= 4096; i += 7) EXPECT_NEAR(fif_eval(maps, run.g, run.g.x_at(i)), run.g.value(i), 1e-10);
    EXPECT_EQ(fif_eval(maps, run.g, -1.0), 0.0);
    EXPECT_NEAR(fif_eval(maps, run.g, 0.75), 0.9, 1e-12);
}

TEST(Theta, RejectsMismatchedRecords) {
    EXPECT_THROW(theta_and_contraction({0.5}, {0.1, 0.2}, {0.1}), StructuralError);
    EXPECT_THROW(theta_and_contraction({1.0}, {0.1}, {0.1}), ContractError);
}

TEST(RbOperator, ZeroScalingGivesLinearInterpolant) {
    oracle::Gen gen(63);
    const auto d = five_knots();
    const auto maps = build_fif_maps(d, {0.0, 0.0, 0.0, 0.0});
    const auto out = rb_apply(maps, random_pinned(gen, maps, 512));
    for (std::size_t i = 0; i <= 512; ++i) EXPECT_NEAR(out.value(i), pl(d, out.x_at(i)), 1e-12);
}

TEST(RbOperator, KnotValuesReproducedForAnyInput) {
    oracle::Gen gen(64);
    const auto d = five_knots();
    for (int rep = 0; rep < 50; ++rep) {
        const auto maps = build_fif_maps(d, random_alphas(gen, 4));
        const auto out = rb_apply(maps, random_pinned(gen, maps, 256));
        for (std::size_t n = 0; n <= 4; ++n) EXPECT_NEAR(out.value(64 * n), d.y[n], 1e-12);
    }
}

TEST(RbOperator, RejectsUnpinnedInput) {
    const auto maps = build_fif_maps(tent(), {0.5, -0.5});
    EXPECT_THROW(rb_apply(maps, SampledFunction(0.0, 1.0, {0.1, 0.5, 0.0})), ContractError);
    EXPECT_THROW(rb_apply(maps, SampledFunction(0.0, 2.0, {0.0, 0.5, 0.0})), StructuralError);
}

TEST(RbOperator, ContractsInSupNorm) {
    oracle::Gen gen(65);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = random_knots(gen, gen.index(2, 6));
        const auto alphas = random_alphas(gen, d.intervals());
        const auto maps = build_fif_maps(d, alphas);
        const auto f = random_pinned(gen, maps, 300), g = random_pinned(gen, maps, 300);
        double bmax = 0.0;
        for (double a : alphas) bmax = std::max(bmax, std::abs(a));
        EXPECT_LE(sup_distance(rb_apply(maps, f), rb_apply(maps, g)), (bmax + 0.02) * sup_distance(f, g));
    }
}

TEST(FixedPoint, ZeroScalingConvergesInOneStep) {
    const auto d = five_knots();
    const auto run = fif_fixed_point(build_fif_maps(d, {0.0, 0.0, 0.0, 0.0}), 1024, 1e-10);
    EXPECT_EQ(run.iterations, 1u);
    for (std::size_t i = 0; i <= 1024; ++i) EXPECT_NEAR(run.g.value(i), pl(d, run.g.x_at(i)), 1e-12);
}

TEST(FixedPoint, TentWithOppositeScalings) {
    const auto d = tent();
    const auto maps = build_fif_maps(d, {0.5, -0.5});
    const double tol = 1e-8;
    const auto run = fif_fixed_point(maps, 4096, tol);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(run.g(d.x[n]), d.y[n], 1e-7);
    EXPECT_LE(run.measured_ratio, 0.5 + 0.02);
    EXPECT_LE(sup_distance(rb_apply(maps, run.g), run.g), tol);
    // Fixed point of the iteration run much further.
    const auto tight = fif_fixed_point(maps, 4096, 1e-14);
    EXPECT_LE(sup_distance(run.g, tight.g), 10.0 * tol);
}

TEST(FixedPoint, InterpolatesRandomData) {
    oracle::Gen gen(66);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = gen.index(2, 6);
        const auto d = random_knots(gen, n);
        const auto alphas = random_alphas(gen, n, 0.8);
        const double tol = 1e-9;
        const auto run = fif_fixed_point(build_fif_maps(d, alphas), 2048, tol);
        for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(fif_eval(build_fif_maps(d, alphas), run.g, d.x[i]), d.y[i], 10.0 * tol + 1e-12);
        double bmax = 0.0;
        for (double a : alphas) bmax = std::max(bmax, std::abs(a));
        EXPECT_LE(run.measured_ratio, bmax + 0.02);
    }
}

TEST(FixedPoint, RejectsNonPositiveTolerance) {
    EXPECT_THROW(fif_fixed_point(build_fif_maps(tent(), {0.5, 0.5}), 64, 0.0), ContractError);
}

TEST(ProductFif, SingleFactorMatchesFixedPoint) {
    const auto d = five_knots();
    const std::vector<double> alphas{0.4, -0.3, 0.2, 0.5};
    const auto pf = product_fif({{d, alphas}}, 1024, 1e-10);
    const auto run = fif_fixed_point(build_fif_maps(d, alphas), 1024, 1e-10);
    ASSERT_EQ(pf.factor_count(), 1u);
    EXPECT_EQ(pf.factors[0].values(), run.g.values());
}

TEST(ProductFif, ZeroScalingsGiveProductOfLinearInterpolants) {
    const auto d1 = tent(), d2 = five_knots();
    const auto pf = product_fif({{d1, {0.0, 0.0}}, {d2, {0.0, 0.0, 0.0, 0.0}}}, 512, 1e-10);
    oracle::Gen gen(67);
    for (int rep = 0; rep < 200; ++rep) {
        const double x1 = gen.uniform(0.0, 1.0), x2 = gen.uniform(0.0, 1.0);
        const auto g = pf({x1, x2});
        EXPECT_NEAR(g[0], pl(d1, x1), 1e-12);
        EXPECT_NEAR(g[1], pl(d2, x2), 1e-12);
    }
    EXPECT_THROW(pf({0.5}), StructuralError);
}

TEST(ProductFif, ProductOperatorFixesTheTuple) {
    const double tol = 1e-9;
    const auto pf = product_fif({{tent(), {0.5, -0.5}}, {five_knots(), {0.3, -0.6, 0.2, 0.7}}}, 2048, tol);
    const auto res = product_residual(pf);
    ASSERT_EQ(res.factor_residuals.size(), 2u);
    EXPECT_LE(res.residual, tol);
    // Componentwise identity: each factor moves exactly as under its own operator.
    for (std::size_t k = 0; k < 2; ++k)
        EXPECT_EQ(res.factor_residuals[k], sup_distance(rb_apply(pf.maps[k], pf.factors[k]), pf.factors[k]));
}

TEST(ProductFif, InterpolatesEveryFactor) {
    oracle::Gen gen(68);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<FactorSpec> specs;
        const std::size_t m = gen.index(2, 4);
        for (std::size_t k = 0; k < m; ++k) {
            const auto d = random_knots(gen, gen.index(2, 5));
            specs.push_back({d, random_alphas(gen, d.intervals(), 0.8)});
        }
        const double tol = 1e-8;
        const auto pf = product_fif(specs, 1024, tol);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < specs[k].data.x.size(); ++i)
                {
                std::vector<double> x(m, specs[k].data.x[0]);
                for (std::size_t j = 0; j < m; ++j) x[j] = specs[j].data.x[0];
                x[k] = specs[k].data.x[i];
                EXPECT_NEAR(pf(x)[k], specs[k].data.y[i], 10.0 * tol + 1e-12);
            }
    }
}

TEST(Norms, SingleFactorNormsAgree) {
    const auto pf = product_fif({{five_knots(), {0.4, -0.3, 0.2, 0.5}}}, 1024, 1e-9);
    const auto r = norms_and_equivalence(pf.factors);
    EXPECT_EQ(r.norm_inf, r.norm_0);
    EXPECT_TRUE(r.ok);
}

TEST(Norms, ConstantOnes) {
    const SampledFunction one(0.0, 1.0, std::vector<double>(65, 1.0));
    const auto r = norms_and_equivalence({one, one});
    EXPECT_DOUBLE_EQ(r.norm_inf, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(r.norm_0, std::sqrt(2.0));
    EXPECT_TRUE(r.ok);
}

TEST(Norms, OneAndZero) {
    const SampledFunction one(0.0, 1.0, std::vector<double>(65, 1.0)), zero(0.0, 1.0, std::vector<double>(65, 0.0));
    const auto r = norms_and_equivalence({one, zero});
    EXPECT_DOUBLE_EQ(r.norm_inf, 1.0);
    EXPECT_DOUBLE_EQ(r.norm_0, 1.0);
}

TEST(Norms, SandwichOnRandomTuples) {
    oracle::Gen gen(69);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t m = gen.index(1, 4);
        std::vector<SampledFunction> fs;
        for (std::size_t k = 0; k < m; ++k) {
            std::vector<double> v(gen.index(2, 40));
            for (auto& s : v) s = gen.uniform(-5.0, 5.0);
            fs.emplace_back(0.0, 1.0, v);
        }
        const auto r = norms_and_equivalence(fs);
        EXPECT_TRUE(r.ok);
        EXPECT_TRUE(r.enumerated);
        EXPECT_LE(r.norm_0 / std::sqrt(static_cast<double>(m)), r.norm_inf + 1e-9);
        EXPECT_LE(r.norm_inf, r.norm_0 + 1e-9);
        // Factorwise supremum agrees with the enumerated lattice.
        EXPECT_NEAR(norms_and_equivalence(fs, 0).norm_inf, r.norm_inf, 1e-12);
    }
}

TEST(JoinUp, SigmaIndexing) {
    EXPECT_EQ(sigma(1, 0), 0u);
    EXPECT_EQ(sigma(3, 0), 2u);
    EXPECT_EQ(sigma(3, 5), 3u);
}

TEST(JoinUp, SingleFactorFourCorners) {
    const auto r = join_up_check({build_fif_maps(tent(), {0.5, -0.5})});
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.checked, 4u);
}

TEST(JoinUp, HoldsForAnyScalings) {
    oracle::Gen gen(70);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<FifMaps> maps;
        std::size_t corners = 1;
        for (std::size_t k = 0, m = gen.index(1, 3); k < m; ++k) {
            const auto d = random_knots(gen, gen.index(2, 4));
            maps.push_back(build_fif_maps(d, random_alphas(gen, d.intervals(), 0.99)));
            corners *= 2 * d.intervals();
        }
        const auto r = join_up_check(maps);
        EXPECT_TRUE(r.ok) << r.max_error;
        EXPECT_EQ(r.checked, corners);
    }
}

TEST(JoinUp, CorruptedInterceptFails) {
    auto maps = build_fif_maps(five_knots(), {0.4, -0.3, 0.2, 0.5});
    maps.pieces[2].e += 1e-6;
    EXPECT_FALSE(join_up_check({build_fif_maps(tent(), {0.1, 0.1}), maps}).ok);
}
