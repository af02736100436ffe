/**
 * @file verify.hpp
 * @brief Verification reports and the default battery of numerical checks.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fractal/catalog.hpp"
#include "fractal/dimension.hpp"
#include "fractal/errors.hpp"
#include "fractal/fif.hpp"
#include "fractal/ifs.hpp"
#include "fractal/inhomogeneous.hpp"
#include "fractal/metric.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

struct VerificationReport {
    std::string suite;
    std::string check;
    std::string anchor;  ///< statement being verified
    double measured = 0.0;
    double bound = 0.0;
    Verdict status = Verdict::Inconclusive;
    std::string detail;
    double seconds = 0.0;
};

struct BatteryOptions {
    std::optional<std::string> only;  ///< run a single suite
    bool inject_fault = false;        ///< perturb one product map offset by 1e-2
    std::uint64_t seed = 20240521;
};

inline const std::vector<std::string>& battery_suites() {
    static const std::vector<std::string> names{"equivalence", "product", "decomposition", "osc", "dimension", "fif"};
    return names;
}

namespace anchors {
inline constexpr const char* kEquivalence = "product Hausdorff metric: H0/sqrt(m) <= H' <= H0";
inline constexpr const char* kUnion = "h(union C_i, union D_i) <= max_i h(C_i, D_i)";
inline constexpr const char* kProductAttractor = "attractor of a product IFS is the product of the factor attractors";
inline constexpr const char* kFactorization = "product Hutchinson operator on product sets equals the product of factor operators";
inline constexpr const char* kDecomposition = "inhomogeneous attractor F_C = O u F_empty";
inline constexpr const char* kProductInhomogeneous = "inhomogeneous product attractor is the product of factor attractors F_{C_k}";
inline constexpr const char* kOsc = "product IFS satisfies OSC iff every factor IFS does";
inline constexpr const char* kMoran = "similarity dimension solves sum_i c_i^s = 1";
inline constexpr const char* kProductDimension = "dim of a product of OSC self-similar attractors is sum_k s_k";
inline constexpr const char* kInhomogeneousDimension = "dim F_C = sum_k max(dim F_k, dim C_k) with disjoint images";
inline constexpr const char* kFifInterpolation = "FIF fixed point interpolates the knots";
inline constexpr const char* kFifContraction = "RB operator contracts in sup norm with factor max |alpha_n|";
inline constexpr const char* kProductFif = "product RB operator fixes the tuple of factor FIFs";
inline constexpr const char* kNorms = "||prod f||_0 / sqrt(m) <= ||prod f||_inf <= ||prod f||_0";
inline constexpr const char* kJoinUp = "product maps join up at sigma-indexed corner knots";
}  // namespace anchors

namespace detail {

inline PointCloud random_cloud(std::mt19937_64& rng, std::size_t dim, std::size_t max_points) {
    std::uniform_int_distribution<std::size_t> count(1, max_points);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = count(rng);
    std::vector<double> flat(n * dim);
    for (auto& v : flat) v = u(rng);
    return PointCloud(dim, std::move(flat));
}

inline VerificationReport make_report(std::string suite, std::string check, const char* anchor, double measured,
                                      double bound, bool ok, std::string detail = {}) {
    return {std::move(suite), std::move(check), anchor, measured, bound, ok ? Verdict::Pass : Verdict::Fail,
            std::move(detail), 0.0};
}

inline std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

}  // namespace detail

inline std::vector<std::function<VerificationReport()>> equivalence_checks(const BatteryOptions& opt) {
    std::vector<std::function<VerificationReport()>> out;
    out.push_back([] {
        const PointCloud g = PointCloud::grid({0.0}, {1.0}, 0.25);
        const ProductSet a({g, g}), b({PointCloud(1, {0.0}), PointCloud(1, {0.0})});
        const auto r = check_equivalence_bounds(a, b);
        return detail::make_report("equivalence", "unit grid vs origin", anchors::kEquivalence, r.hprime, r.h0, r.ok(),
                                   "H0=" + detail::fmt(r.h0) + " H'=" + detail::fmt(r.hprime));
    });
    out.push_back([seed = opt.seed] {
        std::mt19937_64 rng(seed);
        std::size_t failures = 0;
        double worst = -1.0;
        for (int t = 0; t < 1000; ++t) {
            const ProductSet a({detail::random_cloud(rng, 1, 12), detail::random_cloud(rng, 1, 12)});
            const ProductSet b({detail::random_cloud(rng, 1, 12), detail::random_cloud(rng, 1, 12)});
            const auto r = check_equivalence_bounds(a, b);
            if (!r.ok()) ++failures;
            if (r.h0 > 0.0) worst = std::max(worst, (r.lower - r.hprime) / r.h0);
        }
        return detail::make_report("equivalence", "1000 random pairs in [0,1]^2", anchors::kEquivalence,
                                   static_cast<double>(failures), 0.0, failures == 0,
                                   "largest relative lower-bound excess " + detail::fmt(worst));
    });
    out.push_back([seed = opt.seed] {
        std::mt19937_64 rng(seed + 1);
        std::size_t failures = 0;
        for (int t = 0; t < 200; ++t) {
            std::vector<PointCloud> cs, ds;
            const int n = 1 + t % 4;
            for (int i = 0; i < n; ++i) {
                cs.push_back(detail::random_cloud(rng, 2, 8));
                ds.push_back(detail::random_cloud(rng, 2, 8));
            }
            if (!union_hausdorff_check(cs, ds).ok) ++failures;
        }
        return detail::make_report("equivalence", "union inequality on 200 random collections", anchors::kUnion,
                                   static_cast<double>(failures), 0.0, failures == 0);
    });
    return out;
}

inline VerificationReport product_attractor_report(const std::string& name, const ProductIfs& p, double tol, bool fault) {
    ProductCheckOptions o;
    o.iteration.snap = true;
    o.embed_cap = 50'000'000;
    o.fault_offset = fault ? 1e-2 : 0.0;
    const auto r = verify_product_attractor(p, tol, o);
    return detail::make_report("product", name, anchors::kProductAttractor, r.distance, r.bound, r.ok,
                               "direct " + std::to_string(r.direct_points) + " points, embedded " +
                                   std::to_string(r.embedded_points) + " points" + (fault ? ", fault injected" : ""));
}

/// Exact set equality of T(embed B) and embed(W_k(B_k)) on random seeds.
inline std::size_t factorization_failures(const ProductIfs& p, std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const IfsSystem t = p.as_system();
    std::size_t failures = 0;
    for (std::size_t n = 0; n < trials; ++n) {
        std::vector<PointCloud> bs, ws;
        for (const auto& f : p.factors()) {
            bs.push_back(detail::random_cloud(rng, f.dimension(), 10));
            ws.push_back(hutchinson(f, bs.back()));
        }
        const PointCloud lhs = hutchinson(t, embed(ProductSet(bs)));
        const PointCloud rhs = embed(ProductSet(ws));
        if (!same_point_set(lhs, rhs)) ++failures;
    }
    return failures;
}

inline std::vector<std::function<VerificationReport()>> product_checks(const BatteryOptions& opt) {
    std::vector<std::function<VerificationReport()>> out;
    const bool fault = opt.inject_fault;
    out.push_back([fault] {
        return product_attractor_report("cantor x cantor, tol 3^-8", catalog::cantor_by_cantor(), std::pow(3.0, -8), fault);
    });
    out.push_back([fault] {
        return product_attractor_report("[0,1] x sixth-cantor, tol 6^-5", catalog::interval_by_sixth_cantor(),
                                        std::pow(6.0, -5), fault);
    });
    out.push_back([fault] {
        return product_attractor_report("third x half maps, tol 1e-3", catalog::third_by_half(), 1e-3, fault);
    });
    out.push_back([seed = opt.seed] {
        std::size_t failures = 0;
        failures += factorization_failures(catalog::cantor_by_cantor(), 50, seed);
        failures += factorization_failures(catalog::interval_by_sixth_cantor(), 50, seed + 7);
        return detail::make_report("product", "Hutchinson factorization on 100 random seeds", anchors::kFactorization,
                                   static_cast<double>(failures), 0.0, failures == 0);
    });
    out.push_back([] {
        const double tol = std::pow(3.0, -6);
        const auto f = catalog::cantor_with_gap_block(tol / 8.0);
        IterationOptions it;
        it.snap = true;
        const auto r = verify_product_inhomogeneous(product_condensed({f, f}), tol, it, 50'000'000);
        return detail::make_report("product", "gap-block condensed cantor pair, tol 3^-6", anchors::kProductInhomogeneous,
                                   r.distance, r.bound, r.ok,
                                   "direct " + std::to_string(r.direct_points) + " points, embedded " +
                                       std::to_string(r.embedded_points) + " points");
    });
    return out;
}

inline VerificationReport decomposition_report(const std::string& name, const CondensedIfs& sys, std::size_t depth,
                                               double tol) {
    const auto r = decomposition_check(sys, depth, tol);
    return detail::make_report("decomposition", name, anchors::kDecomposition, r.distance, r.bound, r.ok,
                               "truncation bound " + detail::fmt(r.truncation_bound));
}

inline std::vector<std::function<VerificationReport()>> decomposition_checks(const BatteryOptions&) {
    std::vector<std::function<VerificationReport()>> out;
    const double tol = std::pow(3.0, -8);
    out.push_back([tol] { return decomposition_report("halving with C={1}, depth 10", catalog::halving_with_one(), 10, tol); });
    out.push_back([tol] {
        return decomposition_report("gap-block condensed cantor, depth 10", catalog::cantor_with_gap_block(1.0 / 900.0), 10,
                                    tol);
    });
    out.push_back([tol] {
        const CondensedIfs sys(catalog::middle_third_cantor(), PointCloud(1, {0.0}));
        return decomposition_report("cantor with C={0} inside F, depth 8", sys, 8, tol);
    });
    out.push_back([] {
        return decomposition_report("sierpinski with circle, depth 6", catalog::sierpinski_with_circle(0.1, 64), 6,
                                    std::pow(2.0, -8));
    });
    return out;
}

inline std::vector<std::pair<IfsSystem, bool>> osc_battery() {
    return {{catalog::middle_third_cantor(), true},  {catalog::interval_halves(), true},
            {catalog::sixth_cantor(), true},         {catalog::overlapping_halves(), false},
            {catalog::overlapping_sixtenths(), false}, {catalog::overlapping_triple(), false}};
}

inline std::vector<std::function<VerificationReport()>> osc_checks(const BatteryOptions&) {
    std::vector<std::function<VerificationReport()>> out;
    const auto battery = osc_battery();
    const Box unit{{0.0}, {1.0}};
    for (const auto& [sys, expected] : battery) {
        out.push_back([sys = sys, expected = expected, unit] {
            const auto r = osc_check_boxes(sys, unit);
            return detail::make_report("osc", "factor " + sys.label() + " on (0,1)", anchors::kOsc, r.margin, 0.0,
                                       r.holds == expected, std::string("verdict ") + (r.holds ? "holds" : "no conclusion"));
        });
    }
    // Three OSC x OSC, three OSC x overlapping, three overlapping x overlapping.
    const std::vector<std::pair<std::size_t, std::size_t>> pairings{{0, 0}, {0, 1}, {1, 2}, {0, 3}, {1, 4},
                                                                    {2, 5}, {3, 3}, {3, 4}, {4, 5}};
    for (const auto& [i, j] : pairings) {
        out.push_back([a = battery[i].first, b = battery[j].first, unit] {
            const auto r = osc_check_product(make_product_ifs({a, b}), {unit, unit});
            std::string detail = std::string("product ") + (r.product.holds ? "holds" : "no conclusion") + ", factors " +
                                 (r.factors_hold ? "hold" : "fail");
            if (r.witness) detail += ", lifted witness gap " + detail::fmt(r.witness_gap);
            return detail::make_report("osc", a.label() + " x " + b.label(), anchors::kOsc, r.product.margin, 0.0,
                                       r.agrees, detail);
        });
    }
    return out;
}

inline std::vector<std::function<VerificationReport()>> dimension_checks(const BatteryOptions&) {
    std::vector<std::function<VerificationReport()>> out;
    const auto moran_case = [](std::vector<double> ratios, double expected, std::string name) {
        return [ratios = std::move(ratios), expected, name = std::move(name)] {
            const auto s = moran_solve(ratios);
            return detail::make_report("dimension", name, anchors::kMoran, std::abs(s.s - expected), 1e-9,
                                       std::abs(s.s - expected) <= 1e-9, "s=" + detail::fmt(s.s));
        };
    };
    out.push_back(moran_case({0.5, 0.5}, 1.0, "moran [1/2,1/2]"));
    out.push_back(moran_case({1.0 / 3.0, 1.0 / 3.0}, std::log(2.0) / std::log(3.0), "moran [1/3,1/3]"));
    out.push_back(moran_case({1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}, std::log(3.0) / std::log(6.0), "moran [1/6,1/6,1/6]"));
    out.push_back([] {
        const IfsSystem f = catalog::middle_third_cantor();
        const PointCloud c = catalog::left_endpoints(f, 12);
        const ProductSet cc({c, c});
        const auto osc = osc_check_boxes(f, Box{{0.0}, {1.0}});
        const auto est = box_dimension_estimate(embed(cc, 20'000'000), std::pow(3.0, -7), std::pow(3.0, -2), 6);
        const auto s = moran_solve(f.ratios());
        const auto r = product_dimension_report({s, s}, est, osc.holds);
        return detail::make_report("dimension", "cantor x cantor box estimate", anchors::kProductDimension, r.measured,
                                   r.predicted, r.ok, "predicted " + detail::fmt(r.predicted) + " +- 0.08");
    });
    out.push_back([] {
        const IfsSystem f1 = catalog::interval_halves(), f2 = catalog::sixth_cantor();
        const ProductSet set({PointCloud::grid({0.0}, {1.0}, 1e-4), catalog::left_endpoints(f2, 7)});
        const bool osc = osc_check_boxes(f1, Box{{0.0}, {1.0}}).holds && osc_check_boxes(f2, Box{{0.0}, {1.0}}).holds;
        const auto est = box_dimension_estimate(set, std::pow(6.0, -4), std::pow(6.0, -1), 4);
        const auto r = product_dimension_report({moran_solve(f1.ratios()), moran_solve(f2.ratios())}, est, osc);
        return detail::make_report("dimension", "[0,1] x sixth-cantor box estimate", anchors::kProductDimension,
                                   r.measured, r.predicted, r.ok, "predicted " + detail::fmt(r.predicted) + " +- 0.08");
    });
    out.push_back([] {
        // The orbit of C converges slowly to its limiting dimension, so
        // the window sits at fine scales.
        const double tol = std::pow(3.0, -14);
        const auto f = catalog::cantor_with_gap_block(tol);
        IterationOptions it;
        it.snap = true;
        const PointCloud fc = inhomogeneous_attractor(f, tol, it);
        const auto disjoint = pairwise_disjoint_images(f, fc);
        const double s = moran_solve(f.base().ratios()).s;
        const InhomogeneousFactorData data{s, 1.0, disjoint.disjoint};
        const auto est = box_dimension_estimate(ProductSet({fc, fc}), std::pow(3.0, -11), std::pow(3.0, -7), 5);
        const auto r = inhomogeneous_dimension_report({data, data}, est);
        VerificationReport rep = detail::make_report("dimension", "gap-block condensed cantor pair", anchors::kInhomogeneousDimension,
                                                     r.measured, r.predicted, r.verdict == Verdict::Pass, r.note);
        rep.status = r.verdict;
        return rep;
    });
    return out;
}

inline std::vector<std::function<VerificationReport()>> fif_checks(const BatteryOptions& opt) {
    std::vector<std::function<VerificationReport()>> out;
    const InterpolationData tent({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
    const std::vector<double> alphas{0.5, -0.5};
    out.push_back([tent, alphas] {
        const FifMaps maps = build_fif_maps(tent, alphas);
        const FifRun run = fif_fixed_point(maps, 4096, 1e-8);
        double worst = 0.0;
        for (std::size_t i = 0; i < tent.x.size(); ++i) worst = std::max(worst, std::abs(run.g(tent.x[i]) - tent.y[i]));
        return detail::make_report("fif", "knot reproduction, M=4096, tol=1e-8", anchors::kFifInterpolation, worst, 1e-7,
                                   worst <= 1e-7, std::to_string(run.iterations) + " iterations");
    });
    out.push_back([tent, alphas, seed = opt.seed] {
        const FifMaps maps = build_fif_maps(tent, alphas);
        std::mt19937_64 rng(seed + 3);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            std::vector<double> a(1025), b(1025);
            for (std::size_t i = 0; i < a.size(); ++i) {
                a[i] = u(rng);
                b[i] = u(rng);
            }
            a.front() = b.front() = tent.y.front();
            a.back() = b.back() = tent.y.back();
            const SampledFunction f(0.0, 1.0, a), g(0.0, 1.0, b);
            const double before = sup_distance(f, g);
            if (before == 0.0) continue;
            worst = std::max(worst, sup_distance(rb_apply(maps, f), rb_apply(maps, g)) / before);
        }
        return detail::make_report("fif", "RB contraction on 50 random pinned pairs", anchors::kFifContraction, worst,
                                   0.5 + 0.02, worst <= 0.52);
    });
    out.push_back([tent, alphas] {
        const InterpolationData second({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {0.0, 0.6, 0.2, 1.0});
        const ProductFif pf = product_fif({{tent, alphas}, {second, {0.3, -0.4, 0.25}}}, 4096, 1e-8);
        const auto r = product_residual(pf);
        return detail::make_report("fif", "product RB residual at the factor fixed points", anchors::kProductFif,
                                   r.residual, 1e-8, r.residual <= 1e-8);
    });
    out.push_back([seed = opt.seed] {
        std::mt19937_64 rng(seed + 5);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        std::size_t failures = 0;
        for (int t = 0; t < 200; ++t) {
            std::vector<SampledFunction> fs;
            const int m = 1 + t % 3;
            for (int k = 0; k < m; ++k) {
                std::vector<double> v(33);
                for (auto& x : v) x = u(rng);
                fs.emplace_back(0.0, 1.0, std::move(v));
            }
            if (!norms_and_equivalence(fs).ok) ++failures;
        }
        return detail::make_report("fif", "norm sandwich on 200 random tuples", anchors::kNorms,
                                   static_cast<double>(failures), 0.0, failures == 0);
    });
    out.push_back([tent, alphas] {
        const InterpolationData second({0.0, 0.25, 0.6, 1.0}, {1.0, -0.5, 0.3, 2.0});
        const auto r = join_up_check({build_fif_maps(tent, alphas), build_fif_maps(second, {0.2, 0.7, -0.1})});
        return detail::make_report("fif", "sigma join-up at corner knots", anchors::kJoinUp, r.max_error, kEndpointTol, r.ok,
                                   std::to_string(r.checked) + " corner tuples");
    });
    return out;
}

/// Runs the battery. Failures are report entries, not exceptions; a check
/// that throws is reported as failed with the error message.
inline std::vector<VerificationReport> verify_all(const BatteryOptions& opt = {}) {
    if (opt.only) {
        const auto& names = battery_suites();
        if (std::find(names.begin(), names.end(), *opt.only) == names.end())
            throw ContractError("unknown suite '" + *opt.only + "'");
    }
    std::vector<std::pair<std::string, std::vector<std::function<VerificationReport()>>>> suites{
        {"equivalence", equivalence_checks(opt)}, {"product", product_checks(opt)},
        {"decomposition", decomposition_checks(opt)}, {"osc", osc_checks(opt)},
        {"dimension", dimension_checks(opt)},        {"fif", fif_checks(opt)}};
    std::vector<VerificationReport> reports;
    for (auto& [name, checks] : suites) {
        if (opt.only && *opt.only != name) continue;
        for (auto& check : checks) {
            const auto start = std::chrono::steady_clock::now();
            VerificationReport r;
            try {
                r = check();
            } catch (const Error& e) {
                r = {name, "(error)", "", 0.0, 0.0, Verdict::Fail, e.what(), 0.0};
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            reports.push_back(std::move(r));
        }
    }
    return reports;
}

}  // namespace fractal
