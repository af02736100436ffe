/**
 * @file inhomogeneous.hpp
 * @brief IFSs with a condensation set and their inhomogeneous attractors.
 *
 * With condensation set C the operator is W(B) = C u f_1(B) u ... u f_N(B).
 * The constant map B -> C has contraction factor 0, so W contracts with the
 * largest factor of the base maps and the same certified iteration as for
 * homogeneous attractors applies, started from C.
 *
 * A discrete net C' of C with resolution eps moves the fixed point by at most
 * eps / (1 - c); that amount is added to the recorded resolution.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fractal/affine_map.hpp"
#include "fractal/errors.hpp"
#include "fractal/ifs.hpp"
#include "fractal/metric.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

class CondensedIfs {
public:
    /// `maps` may be empty; the operator then always returns C.
    CondensedIfs(std::vector<AffineMap> maps, PointCloud condensation, std::string label = {})
        : maps_(std::move(maps)), condensation_(std::move(condensation)), label_(std::move(label)) {
        for (const auto& m : maps_)
            if (m.dimension() != condensation_.dimension())
                throw StructuralError("condensation set and maps must share one dimension");
    }

    CondensedIfs(const IfsSystem& base, PointCloud condensation)
        : CondensedIfs(base.maps(), std::move(condensation), base.label()) {}

    std::size_t dimension() const { return condensation_.dimension(); }
    std::size_t size() const { return maps_.size(); }
    const std::vector<AffineMap>& maps() const { return maps_; }
    const PointCloud& condensation() const { return condensation_; }
    const std::string& label() const { return label_; }
    bool has_base() const { return !maps_.empty(); }

    IfsSystem base() const {
        if (maps_.empty()) throw StructuralError("condensed system has no base maps");
        return IfsSystem(maps_, label_);
    }

    double contraction() const {
        double c = 0.0;
        for (const auto& m : maps_) c = std::max(c, m.lipschitz());
        return c;
    }

private:
    std::vector<AffineMap> maps_;
    PointCloud condensation_;
    std::string label_;
};

/// C u f_1(B) u ... u f_N(B), C first.
inline PointCloud w_theta(const CondensedIfs& sys, const PointCloud& b, const HutchinsonOptions& opt = {}) {
    if (b.dimension() != sys.dimension()) throw StructuralError("cloud dimension does not match the system");
    const std::size_t d = sys.dimension();
    const PointCloud& c = sys.condensation();
    Box bounds;
    if (opt.snap_width > 0.0) {
        bounds = c.bounding_box();
        const Box in = b.bounding_box();
        for (const auto& m : sys.maps()) bounds.expand(image_box(m, in));
    }
    PointAccumulator acc(d, opt.snap_width, bounds, opt.point_cap);
    for (std::size_t i = 0; i < c.size(); ++i) acc.add(c.point(i));
    Vector y(d);
    for (const auto& m : sys.maps())
        for (std::size_t i = 0; i < b.size(); ++i) {
            m.apply_into(b.point(i), y);
            acc.add(y);
        }
    double eps = std::max(c.resolution(), sys.contraction() * b.resolution());
    if (opt.snap_width > 0.0) eps += PointAccumulator::snap_error(opt.snap_width, d);
    return std::move(acc).finish(eps);
}

/// Inhomogeneous attractor F_C certified within tol of the fixed point for
/// the given net of C; the recorded resolution adds eps_C / (1 - c).
inline FixedPointRun inhomogeneous_attractor_run(const CondensedIfs& sys, double tol, const IterationOptions& opt = {}) {
    const double c = sys.contraction();
    auto step = [&](const PointCloud& b, double width) { return w_theta(sys, b, {width, opt.point_cap}); };
    FixedPointRun run = iterate_to_tolerance(step, sys.condensation().with_resolution(0.0), c, tol, sys.size() + 1, opt);
    const double eps = run.bound + sys.condensation().resolution() / (1.0 - c);
    run.cloud = run.cloud.with_resolution(eps);
    return run;
}

inline PointCloud inhomogeneous_attractor(const CondensedIfs& sys, double tol, const IterationOptions& opt = {}) {
    return inhomogeneous_attractor_run(sys, tol, opt).cloud;
}

struct OrbitalSet {
    PointCloud cloud;
    double truncation_bound = 0.0;
};

/// C together with f_w(C) for every word w of length at most `depth`.
///
/// truncation_bound = r^(depth+1) / (1 - r) * (diam C + diam of a box
/// holding C and the homogeneous attractor).
inline OrbitalSet orbital_set(const CondensedIfs& sys, std::size_t depth, std::size_t point_cap = kDefaultPointCap) {
    const PointCloud& c = sys.condensation();
    const std::size_t n = sys.size();
    double total = 0.0, level = static_cast<double>(c.size());
    for (std::size_t k = 0; k <= depth && n > 0; ++k, level *= static_cast<double>(n)) total += level;
    if (n == 0) total = static_cast<double>(c.size());
    if (total > static_cast<double>(point_cap))
        throw CapacityError("orbital set of depth " + std::to_string(depth) + " needs " + std::to_string(total) +
                            " points, above the cap of " + std::to_string(point_cap));

    std::vector<double> flat(c.coords());
    PointCloud current = c;
    for (std::size_t k = 1; k <= depth && n > 0; ++k) {
        std::vector<double> next;
        next.reserve(current.coords().size() * n);
        for (const auto& m : sys.maps()) {
            const PointCloud img = m(current);
            next.insert(next.end(), img.coords().begin(), img.coords().end());
        }
        current = PointCloud(c.dimension(), std::move(next));
        flat.insert(flat.end(), current.coords().begin(), current.coords().end());
    }

    double bound = 0.0;
    if (n > 0) {
        const double r = sys.contraction();
        Box ambient = c.bounding_box();
        ambient.expand(sys.base().invariant_box());
        bound = std::pow(r, static_cast<double>(depth + 1)) / (1.0 - r) *
                (c.bounding_box().diameter() + ambient.diameter());
    }
    return {PointCloud(c.dimension(), std::move(flat), c.resolution()), bound};
}

struct DecompositionReport {
    double distance = 0.0;
    double truncation_bound = 0.0;
    double bound = 0.0;  ///< truncation + 2 tol + resolutions of the three clouds
    bool ok = false;
};

/// Compares F_C with O_depth u F_empty.
inline DecompositionReport decomposition_check(const CondensedIfs& sys, std::size_t depth, double tol,
                                               const IterationOptions& opt = {}) {
    const PointCloud fc = inhomogeneous_attractor(sys, tol, opt);
    const OrbitalSet orbit = orbital_set(sys, depth, opt.point_cap);
    PointCloud rhs = orbit.cloud;
    double res = fc.resolution() + orbit.cloud.resolution();
    if (sys.has_base()) {
        const PointCloud fe = attractor(sys.base(), tol, opt);
        res += fe.resolution();
        rhs = merge(orbit.cloud, fe);
    }
    DecompositionReport r;
    r.distance = hausdorff_distance(fc, rhs);
    r.truncation_bound = orbit.truncation_bound;
    r.bound = orbit.truncation_bound + 2.0 * tol + res;
    r.ok = r.distance <= r.bound;
    return r;
}

/// Product of condensed systems. Index tuples range over {0, ..., N_k} per
/// factor, index 0 standing for the constant map onto C_k. For a cloud B in
/// the product space a tuple with zero set Z maps B to
///
///     prod_{k in Z} C_k  x  T(pi(B))
///
/// (factors kept in order) where pi projects onto the factors outside Z and
/// T is the product map of the nonzero indices. On product sets this is
/// prod_k w_{k i_k}(B_k).
class CondensedProductIfs {
public:
    explicit CondensedProductIfs(std::vector<CondensedIfs> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw StructuralError("a product needs at least one factor");
        std::size_t off = 0;
        for (const auto& f : factors_) {
            offsets_.push_back(off);
            off += f.dimension();
        }
        dim_ = off;
    }

    std::size_t factor_count() const { return factors_.size(); }
    const CondensedIfs& factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<CondensedIfs>& factors() const { return factors_; }
    std::size_t dimension() const { return dim_; }
    std::size_t offset(std::size_t k) const { return offsets_.at(k); }

    std::size_t tuple_count() const {
        std::size_t n = 1;
        for (const auto& f : factors_) n *= f.size() + 1;
        return n;
    }

    std::vector<std::size_t> index_tuple(std::size_t flat) const {
        std::vector<std::size_t> t(factors_.size());
        for (std::size_t k = factors_.size(); k-- > 0;) {
            t[k] = flat % (factors_[k].size() + 1);
            flat /= factors_[k].size() + 1;
        }
        return t;
    }

    double contraction() const {
        double c = 0.0;
        for (const auto& f : factors_) c = std::max(c, f.contraction());
        return c;
    }

    ProductSet condensation() const {
        std::vector<PointCloud> cs;
        for (const auto& f : factors_) cs.push_back(f.condensation());
        return ProductSet(std::move(cs));
    }

    /// Hausdorff error from using nets of the C_k: root-sum-of-squares of
    /// their resolutions.
    double condensation_resolution() const {
        double acc = 0.0;
        for (const auto& f : factors_) acc += f.condensation().resolution() * f.condensation().resolution();
        return std::sqrt(acc);
    }

private:
    std::vector<CondensedIfs> factors_;
    std::vector<std::size_t> offsets_;
    std::size_t dim_ = 0;
};

inline CondensedProductIfs product_condensed(std::vector<CondensedIfs> systems) {
    return CondensedProductIfs(std::move(systems));
}

namespace detail {

// Distinct points of B restricted to the coordinates of the listed factors.
inline std::vector<Vector> project_factors(const CondensedProductIfs& p, const PointCloud& b,
                                           const std::vector<std::size_t>& ks) {
    std::vector<Vector> out;
    out.reserve(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto x = b.point(i);
        Vector v;
        for (auto k : ks) {
            const auto o = p.offset(k);
            v.insert(v.end(), x.begin() + static_cast<std::ptrdiff_t>(o),
                     x.begin() + static_cast<std::ptrdiff_t>(o + p.factor(k).dimension()));
        }
        out.push_back(std::move(v));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Per-factor axis boxes covering every tuple image of a set with the given
// per-factor projections' bounding boxes.
inline Box tuple_image_bounds(const CondensedProductIfs& p, const Box& in) {
    Box out;
    for (std::size_t k = 0; k < p.factor_count(); ++k) {
        const auto& f = p.factor(k);
        const std::size_t o = p.offset(k), d = f.dimension();
        Box sub{Vector(in.lo.begin() + static_cast<std::ptrdiff_t>(o), in.lo.begin() + static_cast<std::ptrdiff_t>(o + d)),
                Vector(in.hi.begin() + static_cast<std::ptrdiff_t>(o), in.hi.begin() + static_cast<std::ptrdiff_t>(o + d))};
        Box fk = f.condensation().bounding_box();
        for (const auto& m : f.maps()) fk.expand(image_box(m, sub));
        out.lo.insert(out.lo.end(), fk.lo.begin(), fk.lo.end());
        out.hi.insert(out.hi.end(), fk.hi.begin(), fk.hi.end());
    }
    return out;
}

}  // namespace detail

/// Image of B under the set-valued product map of one index tuple, emitted
/// point by point into `sink(span)`.
template <class Sink>
void for_each_tuple_image(const CondensedProductIfs& p, std::span<const std::size_t> tuple, const PointCloud& b,
                          Sink&& sink) {
    const std::size_t m = p.factor_count();
    if (tuple.size() != m) throw StructuralError("index tuple length must equal the factor count");
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < m; ++k) {
        if (tuple[k] > p.factor(k).size()) throw StructuralError("tuple index out of range");
        if (tuple[k] != 0) active.push_back(k);
    }

    // Image of the projection onto the active factors under their maps.
    std::vector<Vector> moved;
    if (!active.empty()) {
        const auto proj = detail::project_factors(p, b, active);
        moved.reserve(proj.size());
        for (const auto& x : proj) {
            Vector y(x.size());
            std::size_t pos = 0;
            for (auto k : active) {
                const auto& map = p.factor(k).maps()[tuple[k] - 1];
                const std::size_t d = map.dimension();
                map.apply_into({x.data() + pos, d}, {y.data() + pos, d});
                pos += d;
            }
            moved.push_back(std::move(y));
        }
    }

    // Odometer over the condensation factors and the moved set.
    std::vector<std::size_t> passive;
    for (std::size_t k = 0; k < m; ++k)
        if (tuple[k] == 0) passive.push_back(k);
    std::vector<std::size_t> idx(passive.size() + 1, 0);
    std::vector<std::size_t> limit;
    for (auto k : passive) limit.push_back(p.factor(k).condensation().size());
    limit.push_back(active.empty() ? 1 : moved.size());
    Vector out(p.dimension());
    while (true) {
        std::size_t pi = 0, pos_moved = 0;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t o = p.offset(k), d = p.factor(k).dimension();
            if (tuple[k] == 0) {
                auto c = p.factor(k).condensation().point(idx[pi++]);
                std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(o));
            } else {
                const auto& y = moved[idx.back()];
                std::copy(y.begin() + static_cast<std::ptrdiff_t>(pos_moved),
                          y.begin() + static_cast<std::ptrdiff_t>(pos_moved + d),
                          out.begin() + static_cast<std::ptrdiff_t>(o));
                pos_moved += d;
            }
        }
        sink(std::span<const double>(out));
        std::size_t j = idx.size();
        bool done = true;
        while (j-- > 0) {
            if (++idx[j] < limit[j]) {
                done = false;
                break;
            }
            idx[j] = 0;
        }
        if (done) break;
    }
}

inline PointCloud tuple_image(const CondensedProductIfs& p, std::span<const std::size_t> tuple, const PointCloud& b) {
    std::vector<double> flat;
    for_each_tuple_image(p, tuple, b, [&](std::span<const double> x) { flat.insert(flat.end(), x.begin(), x.end()); });
    return PointCloud(p.dimension(), std::move(flat));
}

/// Union of all tuple images of B.
inline PointCloud product_w_theta(const CondensedProductIfs& p, const PointCloud& b, const HutchinsonOptions& opt = {}) {
    if (b.dimension() != p.dimension()) throw StructuralError("cloud dimension does not match the product");
    Box bounds;
    if (opt.snap_width > 0.0) bounds = detail::tuple_image_bounds(p, b.bounding_box());
    PointAccumulator acc(p.dimension(), opt.snap_width, bounds, opt.point_cap);
    for (std::size_t t = 0; t < p.tuple_count(); ++t) {
        const auto tuple = p.index_tuple(t);
        for_each_tuple_image(p, tuple, b, [&](std::span<const double> x) { acc.add(x); });
    }
    double eps = std::max(p.contraction() * b.resolution(), p.condensation_resolution());
    if (opt.snap_width > 0.0) eps += PointAccumulator::snap_error(opt.snap_width, p.dimension());
    return std::move(acc).finish(eps);
}

/// Inhomogeneous product attractor iterated directly in the product space
/// from the embedded product of the condensation sets.
inline FixedPointRun product_inhomogeneous_direct(const CondensedProductIfs& p, double tol,
                                                  const IterationOptions& opt = {},
                                                  std::size_t embed_cap = kDefaultEmbedCap) {
    const double c = p.contraction();
    auto step = [&](const PointCloud& b, double width) { return product_w_theta(p, b, {width, opt.point_cap}); };
    PointCloud seed = embed(p.condensation(), embed_cap).with_resolution(0.0);
    FixedPointRun run = iterate_to_tolerance(step, std::move(seed), c, tol, p.tuple_count(), opt);
    run.cloud = run.cloud.with_resolution(run.bound + p.condensation_resolution() / (1.0 - c));
    return run;
}

struct ProductInhomogeneousReport {
    double distance = 0.0;
    double bound = 0.0;
    bool ok = false;
    std::size_t direct_points = 0;
    std::size_t embedded_points = 0;
};

/// Compares the directly iterated product F_C with the embedded product of
/// the factor attractors F_{C_k}. Passes when their distance is at most
/// 2 tol plus both resolutions.
inline ProductInhomogeneousReport verify_product_inhomogeneous(const CondensedProductIfs& p, double tol,
                                                               const IterationOptions& opt = {},
                                                               std::size_t embed_cap = kDefaultEmbedCap) {
    std::vector<PointCloud> factors;
    for (const auto& f : p.factors()) factors.push_back(inhomogeneous_attractor(f, tol, opt));
    const PointCloud embedded = embed(ProductSet(std::move(factors)), embed_cap);
    const PointCloud direct = product_inhomogeneous_direct(p, tol, opt, embed_cap).cloud;
    ProductInhomogeneousReport r;
    r.distance = hausdorff_distance(direct, embedded);
    r.bound = 2.0 * tol + direct.resolution() + embedded.resolution();
    r.ok = r.distance <= r.bound;
    r.direct_points = direct.size();
    r.embedded_points = embedded.size();
    return r;
}

struct DisjointnessReport {
    bool disjoint = true;
    /// Smallest distance between two images less their resolutions;
    /// +infinity with fewer than two images.
    double margin = std::numeric_limits<double>::infinity();
    std::size_t first = 0, second = 0;  ///< image indices attaining the margin
};

/// Pairwise disjointness of a list of image clouds. Two images count as
/// disjoint when their point distance exceeds the sum of their resolutions.
inline DisjointnessReport images_disjoint(const std::vector<PointCloud>& images) {
    DisjointnessReport r;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            const double m = min_distance(images[i], images[j]) - images[i].resolution() - images[j].resolution();
            if (m < r.margin) {
                r.margin = m;
                r.first = i;
                r.second = j;
            }
        }
    r.disjoint = r.margin > 0.0;
    return r;
}

inline DisjointnessReport pairwise_disjoint_images(const IfsSystem& sys, const PointCloud& on) {
    std::vector<PointCloud> images;
    for (const auto& m : sys.maps()) images.push_back(m(on));
    return images_disjoint(images);
}

/// Images indexed 0 = C, i = f_i(on).
inline DisjointnessReport pairwise_disjoint_images(const CondensedIfs& sys, const PointCloud& on) {
    std::vector<PointCloud> images{sys.condensation()};
    for (const auto& m : sys.maps()) images.push_back(m(on));
    return images_disjoint(images);
}

struct ProductDisjointnessReport {
    std::vector<DisjointnessReport> factors;
    bool factors_disjoint = true;
    std::optional<DisjointnessReport> product;  ///< set when the product images were checked
    bool consistent = true;  ///< product verdict equals the factor conjunction
};

/// Factor criterion on the per-factor clouds and, when `check_product` is
/// set, the tuple images of the embedded product cloud.
inline ProductDisjointnessReport pairwise_disjoint_images(const CondensedProductIfs& p, const std::vector<PointCloud>& on,
                                                          bool check_product = true,
                                                          std::size_t embed_cap = kDefaultEmbedCap) {
    if (on.size() != p.factor_count()) throw StructuralError("need one cloud per factor");
    ProductDisjointnessReport r;
    for (std::size_t k = 0; k < p.factor_count(); ++k) {
        r.factors.push_back(pairwise_disjoint_images(p.factor(k), on[k]));
        r.factors_disjoint = r.factors_disjoint && r.factors.back().disjoint;
    }
    if (check_product) {
        const PointCloud b = embed(ProductSet(on), embed_cap);
        std::vector<PointCloud> images;
        double res = 0.0;
        for (std::size_t t = 0; t < p.tuple_count(); ++t) {
            const auto tuple = p.index_tuple(t);
            images.push_back(tuple_image(p, tuple, b));
        }
        // Resolution of each tuple image: rss over factors of the factor image resolutions.
        for (std::size_t t = 0; t < p.tuple_count(); ++t) {
            const auto tuple = p.index_tuple(t);
            double acc = 0.0;
            for (std::size_t k = 0; k < p.factor_count(); ++k) {
                const auto& f = p.factor(k);
                res = tuple[k] == 0 ? f.condensation().resolution() : f.maps()[tuple[k] - 1].lipschitz() * on[k].resolution();
                acc += res * res;
            }
            images[t] = images[t].with_resolution(std::sqrt(acc));
        }
        r.product = images_disjoint(images);
        r.consistent = r.product->disjoint == r.factors_disjoint;
    }
    return r;
}

}  // namespace fractal
