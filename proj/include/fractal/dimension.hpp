/**
 * @file dimension.hpp
 * @brief Similarity dimensions, box counting and open set condition checks.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fractal/affine_map.hpp"
#include "fractal/errors.hpp"
#include "fractal/ifs.hpp"
#include "fractal/point_cloud.hpp"
#include "fractal/spatial.hpp"

namespace fractal {

struct MoranSolution {
    double s = 0.0;
    std::vector<double> ratios;
    double residual = 0.0;  ///< |sum c_i^s - 1|
};

inline double moran_sum(const std::vector<double>& ratios, double s) {
    double acc = 0.0;
    for (double c : ratios) acc += std::pow(c, s);
    return acc;
}

/// Root of sum_i c_i^s = 1 by bisection. The upper end of the bracket is
/// doubled from 1 until the sum drops below one.
inline MoranSolution moran_solve(const std::vector<double>& ratios) {
    if (ratios.empty()) throw ContractError("Moran equation needs at least one ratio");
    for (double c : ratios)
        if (!(c > 0.0 && c < 1.0)) throw ContractError("Moran ratios must lie in (0, 1), got " + std::to_string(c));
    MoranSolution sol;
    sol.ratios = ratios;
    if (ratios.size() == 1) return sol;

    double lo = 0.0, hi = 1.0;
    while (moran_sum(ratios, hi) >= 1.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (moran_sum(ratios, mid) >= 1.0) lo = mid;
        else hi = mid;
    }
    const double rlo = std::abs(moran_sum(ratios, lo) - 1.0), rhi = std::abs(moran_sum(ratios, hi) - 1.0);
    sol.s = rlo <= rhi ? lo : hi;
    sol.residual = std::min(rlo, rhi);
    if (sol.residual > 1e-9) throw NumericError("Moran bisection left residual " + std::to_string(sol.residual));
    return sol;
}

/// Occupied cells of the axis grid of side r anchored at the coordinate-wise
/// minimum. Cell indices carry a 1e-9 nudge (in cell units) so that points
/// sitting on a cell boundary up to rounding land in the upper cell.
inline std::size_t box_count(const PointCloud& cloud, double r) {
    if (!(r > 0.0)) throw ContractError("box size must be positive");
    const Box box = cloud.bounding_box();
    const std::size_t d = cloud.dimension();
    std::vector<std::int64_t> lo(d, 0), hi(d), cell(d);
    for (std::size_t j = 0; j < d; ++j)
        hi[j] = static_cast<std::int64_t>(std::floor((box.hi[j] - box.lo[j]) / r + 1e-9));
    CellSet cells(lo, hi);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (std::size_t j = 0; j < d; ++j)
            cell[j] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((p[j] - box.lo[j]) / r + 1e-9)), 0, hi[j]);
        cells.insert(cell);
    }
    return cells.size();
}

struct DimensionEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> scales;  ///< strictly decreasing
    std::vector<std::size_t> counts;
    double r_squared = 0.0;
};

/// n geometrically spaced sizes from r_max down to r_min.
inline std::vector<double> geometric_scales(double r_min, double r_max, std::size_t n) {
    if (n < 4) throw ContractError("box dimension needs at least 4 scales");
    if (!(r_min > 0.0) || !(r_max > r_min)) throw ContractError("scale window must satisfy 0 < r_min < r_max");
    std::vector<double> s(n);
    const double q = std::log(r_min / r_max) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) s[i] = r_max * std::exp(q * static_cast<double>(i));
    s.front() = r_max;
    s.back() = r_min;
    return s;
}

namespace detail {

inline void check_resolution(double resolution, const std::vector<double>& scales) {
    for (double r : scales) {
        if (resolution > r / 10.0) {
            std::ostringstream msg;
            msg << "cloud resolution " << resolution << " exceeds one tenth of box size " << r;
            throw ContractError(msg.str());
        }
    }
}

// Least-squares fit of log N_r against -log r.
inline void fit_log_log(DimensionEstimate& est) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < est.scales.size(); ++i) {
        x.push_back(-std::log(est.scales[i]));
        y.push_back(std::log(static_cast<double>(est.counts[i])));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    est.slope = sxy / sxx;
    est.intercept = my - est.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (est.intercept + est.slope * x[i]);
        ss_res += e * e;
    }
    est.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
}

}  // namespace detail

/// Least-squares slope of log N_r against -log r over n geometric scales.
inline DimensionEstimate box_dimension_estimate(const PointCloud& cloud, double r_min, double r_max, std::size_t n_scales) {
    DimensionEstimate est;
    est.scales = geometric_scales(r_min, r_max, n_scales);
    detail::check_resolution(cloud.resolution(), est.scales);
    for (double r : est.scales) est.counts.push_back(box_count(cloud, r));
    detail::fit_log_log(est);
    return est;
}

/// Box count of a product set without embedding it. With the grid anchored
/// at the coordinate-wise minimum the occupied cells of A_1 x ... x A_m are
/// exactly the products of occupied factor cells.
inline std::size_t box_count(const ProductSet& set, double r) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < set.factor_count(); ++k) n *= box_count(set.factor(k), r);
    return n;
}

/// Estimate for a product set counted factorwise; the resolution checked is
/// the root-sum-of-squares of the factor resolutions.
inline DimensionEstimate box_dimension_estimate(const ProductSet& set, double r_min, double r_max, std::size_t n_scales) {
    DimensionEstimate est;
    est.scales = geometric_scales(r_min, r_max, n_scales);
    double acc = 0.0;
    for (std::size_t k = 0; k < set.factor_count(); ++k) acc += set.factor(k).resolution() * set.factor(k).resolution();
    detail::check_resolution(std::sqrt(acc), est.scales);
    for (double r : est.scales) est.counts.push_back(box_count(set, r));
    detail::fit_log_log(est);
    return est;
}

/// Default window [10 eps, diam / 4]. A cloud with zero resolution uses
/// diam * 1e-3 as the lower end.
inline DimensionEstimate box_dimension_estimate(const PointCloud& cloud, std::size_t n_scales = 8) {
    const double diam = cloud.bounding_box().diameter();
    const double r_max = diam / 4.0;
    const double r_min = cloud.resolution() > 0.0 ? cloud.resolution() * 10.0 : diam * 1e-3;
    return box_dimension_estimate(cloud, r_min, r_max, n_scales);
}

struct ProductDimensionReport {
    double predicted = 0.0;  ///< sum of factor similarity dimensions
    double measured = 0.0;
    double deviation = 0.0;
    double tolerance = 0.0;
    bool ok = false;
};

/// Compares the box estimate of a product attractor with the sum of the
/// factor Moran solutions. The factor systems must be OSC-verified
/// similarity systems.
inline ProductDimensionReport product_dimension_report(const std::vector<MoranSolution>& factors,
                                                       const DimensionEstimate& estimate, bool osc_verified,
                                                       double tolerance = 0.08) {
    if (!osc_verified) throw ContractError("product dimension prediction needs OSC-verified factor systems");
    if (factors.empty()) throw StructuralError("need at least one factor solution");
    ProductDimensionReport r;
    for (const auto& f : factors) r.predicted += f.s;
    r.measured = estimate.slope;
    r.deviation = std::abs(r.measured - r.predicted);
    r.tolerance = tolerance;
    r.ok = r.deviation <= tolerance;
    return r;
}

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct InhomogeneousFactorData {
    double homogeneous_dimension = 0.0;   ///< s_k of the base attractor
    double condensation_dimension = 0.0;  ///< known dimension of C_k
    bool images_disjoint = false;         ///< w_{k i}(F_{C_k}) pairwise disjoint
};

struct InhomogeneousDimensionReport {
    double predicted = 0.0;  ///< sum_k max(s_k, d_k)
    double measured = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string note;
};

/// Checks predicted - tol <= measured <= predicted + tol with predicted =
/// sum_k max(s_k, d_k). Valid where Hausdorff, packing and box dimensions
/// coincide for each factor (self-similar OSC factors, interval or point
/// condensation sets). The upper side needs disjoint images in every
/// factor; without that the verdict is inconclusive.
inline InhomogeneousDimensionReport inhomogeneous_dimension_report(const std::vector<InhomogeneousFactorData>& factors,
                                                                   const DimensionEstimate& estimate,
                                                                   double tolerance = 0.1) {
    if (factors.empty()) throw StructuralError("need at least one factor");
    InhomogeneousDimensionReport r;
    bool disjoint = true;
    for (const auto& f : factors) {
        r.predicted += std::max(f.homogeneous_dimension, f.condensation_dimension);
        disjoint = disjoint && f.images_disjoint;
    }
    r.measured = estimate.slope;
    r.tolerance = tolerance;
    if (!disjoint) {
        r.verdict = Verdict::Inconclusive;
        r.note = "disjoint-images hypothesis not verified for every factor";
        return r;
    }
    const bool ok = r.measured >= r.predicted - tolerance && r.measured <= r.predicted + tolerance;
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.note = "box, Hausdorff and packing dimensions agree for self-similar OSC factors and interval or point sets";
    return r;
}

struct OscReport {
    bool holds = false;  ///< true means "holds for this candidate"; false means no conclusion
    double containment_slack = 0.0;
    double min_gap = std::numeric_limits<double>::infinity();
    /// Smallest pairwise gap with two or more maps, else the containment slack.
    double margin = 0.0;
    std::optional<std::pair<std::size_t, std::size_t>> witness;  ///< most overlapping pair
    std::optional<std::size_t> escaping_map;                     ///< a map whose image leaves V
};

namespace detail {

// Largest separation of two open boxes along any axis; >= 0 iff disjoint.
inline double box_gap(const Box& a, const Box& b) {
    double g = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.lo.size(); ++j) g = std::max({g, b.lo[j] - a.hi[j], a.lo[j] - b.hi[j]});
    return g;
}

}  // namespace detail

/// Tests the open set condition for the open box `candidate` by interval
/// arithmetic on image boxes. Needs diagonal linear parts.
inline OscReport osc_check_boxes(const std::vector<AffineMap>& maps, const Box& candidate) {
    if (maps.empty()) throw StructuralError("OSC check needs at least one map");
    for (std::size_t j = 0; j < candidate.lo.size(); ++j)
        if (!(candidate.lo[j] < candidate.hi[j])) throw ContractError("candidate box must be nonempty");
    std::vector<Box> images;
    for (const auto& m : maps) {
        if (m.dimension() != candidate.lo.size()) throw StructuralError("candidate box dimension does not match the maps");
        if (!m.is_diagonal()) throw UnsupportedError("OSC box check supports diagonal linear parts only");
        images.push_back(image_box(m, candidate));
    }
    OscReport r;
    r.containment_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = 0; j < candidate.lo.size(); ++j) {
            const double s = std::min(images[i].lo[j] - candidate.lo[j], candidate.hi[j] - images[i].hi[j]);
            if (s < r.containment_slack) {
                r.containment_slack = s;
                if (s < 0.0) r.escaping_map = i;
            }
        }
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t k = i + 1; k < images.size(); ++k) {
            const double g = detail::box_gap(images[i], images[k]);
            if (g < r.min_gap) {
                r.min_gap = g;
                if (g < 0.0) r.witness = std::make_pair(i, k);
            }
        }
    r.margin = images.size() >= 2 ? r.min_gap : r.containment_slack;
    r.holds = r.containment_slack >= 0.0 && (images.size() < 2 || r.min_gap >= 0.0);
    return r;
}

inline OscReport osc_check_boxes(const IfsSystem& sys, const Box& candidate) {
    return osc_check_boxes(sys.maps(), candidate);
}

struct ProductOscReport {
    std::vector<OscReport> factors;
    bool factors_hold = true;  ///< conjunction of the factor verdicts
    OscReport product;         ///< direct check of the product system on prod V_k
    bool agrees = false;       ///< product verdict equals the conjunction
    /// Product tuples built from a failing factor's overlapping pair, other
    /// factors at index 0.
    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> witness;
    double witness_gap = 0.0;  ///< gap of the lifted pair in the product check
};

inline ProductOscReport osc_check_product(const ProductIfs& p, const std::vector<Box>& candidates) {
    if (candidates.size() != p.factor_count()) throw StructuralError("need one candidate box per factor");
    ProductOscReport r;
    Box v;
    for (std::size_t k = 0; k < p.factor_count(); ++k) {
        r.factors.push_back(osc_check_boxes(p.factor(k), candidates[k]));
        r.factors_hold = r.factors_hold && r.factors.back().holds;
        v.lo.insert(v.lo.end(), candidates[k].lo.begin(), candidates[k].lo.end());
        v.hi.insert(v.hi.end(), candidates[k].hi.begin(), candidates[k].hi.end());
    }
    const IfsSystem sys = p.as_system();
    r.product = osc_check_boxes(sys, v);
    r.agrees = r.product.holds == r.factors_hold;

    for (std::size_t k = 0; k < p.factor_count(); ++k) {
        if (!r.factors[k].witness) continue;
        std::vector<std::size_t> a(p.factor_count(), 0), b(p.factor_count(), 0);
        a[k] = r.factors[k].witness->first;
        b[k] = r.factors[k].witness->second;
        r.witness_gap = detail::box_gap(image_box(p.map(a), v), image_box(p.map(b), v));
        r.witness = std::make_pair(std::move(a), std::move(b));
        break;
    }
    return r;
}

}  // namespace fractal
