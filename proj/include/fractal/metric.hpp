/**
 * @file metric.hpp
 * @brief Product metric, Hausdorff metric and the product Hausdorff metric.
 *
 * For finite sets the Hausdorff distance is the exact max-min
 *
 *     h(A, B) = max( max_a min_b |a - b|, max_b min_a |a - b| ).
 *
 * The directed part is computed with the early-break scheme: a point of A
 * that has some neighbour in B closer than the running maximum cannot change
 * the result, so its search stops at the first such neighbour. Points that
 * do raise the maximum get an exact nearest-neighbour search. The returned
 * value is therefore exactly the brute-force max-min.
 *
 * The product Hausdorff metric on A_1 x ... x A_m is
 *
 *     H0(A, B) = sqrt( sum_k h_k(A_k, B_k)^2 )
 *
 * and the plain Hausdorff distance of the embedded sets, H', satisfies
 * H0 / sqrt(m) <= H' <= H0.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fractal/errors.hpp"
#include "fractal/point_cloud.hpp"
#include "fractal/spatial.hpp"

namespace fractal {

/// Root-sum-of-squares of per-factor Euclidean distances.
inline double product_metric(const ProductPoint& x, const ProductPoint& y) {
    if (!x.same_structure(y)) throw StructuralError("product points have different factor structure");
    double acc = 0.0;
    for (std::size_t k = 0; k < x.factor_count(); ++k) {
        const double d = euclidean(x.factor(k), y.factor(k));
        acc += d * d;
    }
    return std::sqrt(acc);
}

namespace detail {

// Coprime stride so that the visiting order is spread over the cloud.
inline std::size_t visiting_stride(std::size_t n) {
    if (n < 3) return 1;
    std::size_t stride = static_cast<std::size_t>(static_cast<double>(n) * 0.6180339887498949) | 1U;
    while (std::gcd(stride, n) != 1) stride += 2;
    return stride % n == 0 ? 1 : stride;
}

}  // namespace detail

/// max_{a in A} min_{b in B} |a - b|, with B already indexed.
inline double directed_hausdorff(const PointCloud& a, const GridIndex& b_index) {
    double cmax = 0.0;
    const std::size_t n = a.size();
    const std::size_t stride = detail::visiting_stride(n);
    std::size_t i = 0;
    for (std::size_t count = 0; count < n; ++count) {
        const double d = b_index.nearest(a.point(i), cmax);
        if (d > cmax) cmax = d;
        i += stride;
        if (i >= n) i -= n;
    }
    return cmax;
}

inline double directed_hausdorff(const PointCloud& a, const PointCloud& b) {
    if (a.dimension() != b.dimension()) throw StructuralError("Hausdorff distance needs clouds of equal dimension");
    return directed_hausdorff(a, GridIndex(b));
}

/// Exact Hausdorff distance between two finite sets.
inline double hausdorff_distance(const PointCloud& a, const PointCloud& b) {
    if (a.dimension() != b.dimension()) throw StructuralError("Hausdorff distance needs clouds of equal dimension");
    double ab = 0.0;
    {
        const GridIndex bi(b);
        ab = directed_hausdorff(a, bi);
    }
    const GridIndex ai(a);
    const double ba = directed_hausdorff(b, ai);
    return std::max(ab, ba);
}

/// Smallest distance between a point of A and a point of B.
inline double min_distance(const PointCloud& a, const PointCloud& b) {
    if (a.dimension() != b.dimension()) throw StructuralError("distance needs clouds of equal dimension");
    const GridIndex bi(b);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = bi.nearest(a.point(i), -1.0, best);
        if (d < best) best = d;
        if (best == 0.0) break;
    }
    return best;
}

/// Root-sum-of-squares of per-factor Hausdorff distances. With one factor
/// this returns the factor distance unchanged.
inline double product_hausdorff(const ProductSet& a, const ProductSet& b) {
    if (!a.same_structure(b)) throw StructuralError("product sets have different factor structure");
    if (a.factor_count() == 1) return hausdorff_distance(a.factor(0), b.factor(0));
    double acc = 0.0;
    for (std::size_t k = 0; k < a.factor_count(); ++k) {
        const double h = hausdorff_distance(a.factor(k), b.factor(k));
        acc += h * h;
    }
    return std::sqrt(acc);
}

struct EquivalenceReport {
    double h0 = 0.0;      ///< product Hausdorff distance
    double hprime = 0.0;  ///< Hausdorff distance of the embedded sets
    double lower = 0.0;   ///< h0 / sqrt(m)
    bool lower_ok = false;
    bool upper_ok = false;

    bool ok() const { return lower_ok && upper_ok; }
};

inline constexpr double kEquivalenceRelTol = 1e-12;

/// Computes H0 and H' and checks H0 / sqrt(m) <= H' <= H0 to a relative
/// tolerance of 1e-12.
inline EquivalenceReport check_equivalence_bounds(const ProductSet& a, const ProductSet& b,
                                                  std::size_t embed_cap = kDefaultEmbedCap) {
    if (!a.same_structure(b)) throw StructuralError("product sets have different factor structure");
    EquivalenceReport r;
    r.h0 = product_hausdorff(a, b);
    r.hprime = hausdorff_distance(embed(a, embed_cap), embed(b, embed_cap));
    r.lower = r.h0 / std::sqrt(static_cast<double>(a.factor_count()));
    const double slack = kEquivalenceRelTol * r.h0;
    r.lower_ok = r.lower <= r.hprime + slack;
    r.upper_ok = r.hprime <= r.h0 + slack;
    return r;
}

struct UnionReport {
    double lhs = 0.0;  ///< h(union C_i, union D_i)
    double rhs = 0.0;  ///< max_i h(C_i, D_i)
    bool ok = false;
};

/// Checks h(C_1 u ... u C_n, D_1 u ... u D_n) <= max_i h(C_i, D_i).
inline UnionReport union_hausdorff_check(std::span<const PointCloud> cs, std::span<const PointCloud> ds) {
    if (cs.size() != ds.size()) throw StructuralError("union check needs lists of equal length");
    if (cs.empty()) throw StructuralError("union check needs at least one pair");
    UnionReport r;
    for (std::size_t i = 0; i < cs.size(); ++i) r.rhs = std::max(r.rhs, hausdorff_distance(cs[i], ds[i]));
    r.lhs = hausdorff_distance(merge(cs), merge(ds));
    r.ok = r.lhs <= r.rhs + 1e-12;
    return r;
}

}  // namespace fractal
