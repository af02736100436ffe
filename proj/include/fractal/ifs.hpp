/**
 * @file ifs.hpp
 * @brief Iterated function systems, the Hutchinson operator and attractors.
 *
 * Attractors are computed by deterministic iteration B <- W(B) with a
 * certified stopping rule. After n steps from a seed S the a-priori bound
 *
 *     h(W^n(S), A) <= c^n / (1 - c) * h(S, W(S))
 *
 * holds; when the cloud is small the collage bound h(B, A) <= h(B, W(B)) / (1 - c)
 * is also measured. Optional snap-to-grid dedup replaces every image point
 * by the centre of its lattice cell of width s and keeps one point per cell.
 * Each snap moves the set by at most s * sqrt(d) / 2 in Hausdorff distance,
 * and these errors accumulate to at most s * sqrt(d) / (2 (1 - c)). The
 * automatic width keeps that accumulation at or below tol / 2.
 *
 * The resolution of a returned attractor cloud is the certified bound on its
 * Hausdorff distance to the true attractor.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractal/affine_map.hpp"
#include "fractal/errors.hpp"
#include "fractal/metric.hpp"
#include "fractal/point_cloud.hpp"
#include "fractal/spatial.hpp"

namespace fractal {

class IfsSystem {
public:
    explicit IfsSystem(std::vector<AffineMap> maps, std::string label = {})
        : maps_(std::move(maps)), label_(std::move(label)) {
        if (maps_.empty()) throw StructuralError("an IFS needs at least one map");
        const std::size_t d = maps_.front().dimension();
        for (const auto& m : maps_)
            if (m.dimension() != d) throw StructuralError("all maps of an IFS must share one dimension");
    }

    std::size_t size() const { return maps_.size(); }
    std::size_t dimension() const { return maps_.front().dimension(); }
    const AffineMap& map(std::size_t i) const { return maps_.at(i); }
    const std::vector<AffineMap>& maps() const { return maps_; }
    const std::string& label() const { return label_; }

    /// Largest declared Lipschitz constant.
    double contraction() const {
        double c = 0.0;
        for (const auto& m : maps_) c = std::max(c, m.lipschitz());
        return c;
    }

    bool all_similarities() const {
        return std::all_of(maps_.begin(), maps_.end(), [](const AffineMap& m) { return m.is_similarity(); });
    }

    std::vector<double> ratios() const {
        std::vector<double> r;
        for (const auto& m : maps_) r.push_back(m.lipschitz());
        return r;
    }

    /// Axis box containing a closed ball that every map sends into itself,
    /// hence containing the attractor.
    Box invariant_box() const {
        const Vector p = maps_.front().fixed_point();
        double radius = 0.0;
        for (const auto& m : maps_) {
            const double move = euclidean(m(p), p);
            radius = std::max(radius, move / (1.0 - m.lipschitz()));
        }
        Box box{p, p};
        for (std::size_t j = 0; j < p.size(); ++j) {
            box.lo[j] -= radius;
            box.hi[j] += radius;
        }
        return box;
    }

    /// Same maps with offset[coord] of map `index` shifted by delta.
    IfsSystem with_perturbed_offset(std::size_t index, std::size_t coord, double delta) const {
        auto maps = maps_;
        Vector off = maps.at(index).offset();
        off.at(coord) += delta;
        maps[index] = maps[index].with_offset(std::move(off));
        return IfsSystem(std::move(maps), label_);
    }

private:
    std::vector<AffineMap> maps_;
    std::string label_;
};

/// f_{w[0]} o f_{w[1]} o ... o f_{w[n-1]} for a word of 0-based map indices.
inline AffineMap compose_word(const IfsSystem& sys, std::span<const std::size_t> word) {
    if (word.empty()) throw StructuralError("empty words are not part of the semigroup");
    for (auto i : word)
        if (i >= sys.size()) throw StructuralError("word index " + std::to_string(i) + " out of range");
    AffineMap out = sys.map(word[0]);
    for (std::size_t k = 1; k < word.size(); ++k) out = out.compose(sys.map(word[k]));
    return out;
}

/// Image bounding box of `box` under an affine map (interval arithmetic).
inline Box image_box(const AffineMap& m, const Box& box) {
    const std::size_t d = m.dimension();
    Box out{Vector(d), Vector(d)};
    for (std::size_t r = 0; r < d; ++r) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double a = m.linear_at(r, c);
            const double u = a * box.lo[c], v = a * box.hi[c];
            lo += std::min(u, v);
            hi += std::max(u, v);
        }
        out.lo[r] = lo + m.offset()[r];
        out.hi[r] = hi + m.offset()[r];
    }
    return out;
}

inline constexpr std::size_t kDefaultPointCap = 50'000'000;

/// Collects points, optionally snapping them to cell centres of the lattice
/// s * Z^d and keeping one point per cell.
class PointAccumulator {
public:
    PointAccumulator(std::size_t dim, double snap_width, const Box& bounds, std::size_t cap)
        : dim_(dim), snap_(snap_width), cap_(cap), cell_(dim) {
        if (snap_ > 0.0) {
            std::vector<std::int64_t> lo(dim), hi(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                if (!std::isfinite(bounds.lo[j]) || !std::isfinite(bounds.hi[j]))
                    throw NumericError("non-finite bounds while snapping");
                lo[j] = static_cast<std::int64_t>(std::floor(bounds.lo[j] / snap_)) - 1;
                hi[j] = static_cast<std::int64_t>(std::floor(bounds.hi[j] / snap_)) + 1;
            }
            cells_.emplace(std::move(lo), std::move(hi));
        }
    }

    void add(std::span<const double> p) {
        for (double v : p)
            if (!std::isfinite(v)) throw NumericError("non-finite coordinate produced during iteration");
        if (snap_ > 0.0) {
            for (std::size_t j = 0; j < dim_; ++j) cell_[j] = static_cast<std::int64_t>(std::floor(p[j] / snap_));
            if (!cells_->insert(cell_)) return;
            check_cap();
            for (std::size_t j = 0; j < dim_; ++j) coords_.push_back((static_cast<double>(cell_[j]) + 0.5) * snap_);
        } else {
            check_cap();
            coords_.insert(coords_.end(), p.begin(), p.end());
        }
    }

    std::size_t size() const { return coords_.size() / dim_; }

    PointCloud finish(double resolution) && { return PointCloud(dim_, std::move(coords_), resolution); }

    /// Hausdorff error introduced by snapping one set.
    static double snap_error(double width, std::size_t dim) { return 0.5 * width * std::sqrt(static_cast<double>(dim)); }

private:
    void check_cap() {
        if (size() >= cap_)
            throw CapacityError("iteration exceeded the point cap of " + std::to_string(cap_) +
                                " points; enable snap-dedup or raise the cap");
    }

    std::size_t dim_;
    double snap_;
    std::size_t cap_;
    std::vector<std::int64_t> cell_;
    std::optional<CellSet> cells_;
    std::vector<double> coords_;
};

struct HutchinsonOptions {
    double snap_width = 0.0;  ///< 0 disables snap-dedup
    std::size_t point_cap = kDefaultPointCap;
};

/// W(B) = f_1(B) u ... u f_N(B), map-major order. Output resolution is
/// c * eps_in, plus the snap error when snapping.
inline PointCloud hutchinson(const IfsSystem& sys, const PointCloud& b, const HutchinsonOptions& opt = {}) {
    if (b.dimension() != sys.dimension()) throw StructuralError("cloud dimension does not match the IFS");
    const std::size_t d = sys.dimension();
    Box bounds;
    if (opt.snap_width > 0.0) {
        const Box in = b.bounding_box();
        bounds = image_box(sys.map(0), in);
        for (std::size_t i = 1; i < sys.size(); ++i) bounds.expand(image_box(sys.map(i), in));
    }
    PointAccumulator acc(d, opt.snap_width, bounds, opt.point_cap);
    Vector y(d);
    for (const auto& m : sys.maps())
        for (std::size_t i = 0; i < b.size(); ++i) {
            m.apply_into(b.point(i), y);
            acc.add(y);
        }
    double eps = sys.contraction() * b.resolution();
    if (opt.snap_width > 0.0) eps += PointAccumulator::snap_error(opt.snap_width, d);
    return std::move(acc).finish(eps);
}

/// W^depth(seed) without snapping.
inline PointCloud iterate_hutchinson(const IfsSystem& sys, PointCloud seed, std::size_t depth,
                                     std::size_t point_cap = kDefaultPointCap) {
    for (std::size_t n = 0; n < depth; ++n) seed = hutchinson(sys, seed, {0.0, point_cap});
    return seed;
}

struct IterationOptions {
    bool snap = false;
    double snap_width = 0.0;  ///< used when snap is set; 0 picks min(tol/4, tol (1-c) / sqrt(d))
    std::size_t point_cap = kDefaultPointCap;
    std::size_t measured_check_limit = 200'000;  ///< max |W(B)| for the measured collage test
    std::size_t max_iterations = 10'000;
};

struct FixedPointRun {
    PointCloud cloud;
    std::size_t iterations = 0;
    double bound = 0.0;  ///< certified Hausdorff distance to the fixed point
    bool measured_stop = false;
    double snap_width = 0.0;
};

inline double auto_snap_width(double tol, double contraction, std::size_t dim) {
    return std::min(tol / 4.0, tol * (1.0 - contraction) / std::sqrt(static_cast<double>(dim)));
}

/// Iterates a set-valued contraction with factor c < 1 from `seed` until the
/// cloud is certified within tol of the fixed point.
///
/// `step(B, snap_width)` must return the operator image of B, snapped when
/// snap_width > 0, and `images_per_point` bounds |step(B)| / |B| for the
/// measured check.
template <class Step>
FixedPointRun iterate_to_tolerance(Step&& step, PointCloud seed, double c, double tol, std::size_t images_per_point,
                                   const IterationOptions& opt) {
    if (!(tol > 0.0)) throw ContractError("tolerance must be positive");
    if (!(c >= 0.0 && c < 1.0)) throw ContractError("contraction factor must lie in [0, 1)");
    const std::size_t d = seed.dimension();
    const double width = opt.snap ? (opt.snap_width > 0.0 ? opt.snap_width : auto_snap_width(tol, c, d)) : 0.0;
    const double snap_err = width > 0.0 ? PointAccumulator::snap_error(width, d) : 0.0;

    const double h0 = hausdorff_distance(seed, step(seed, 0.0));
    double accumulated = 0.0;
    double cn = 1.0;
    PointCloud b = std::move(seed);
    for (std::size_t n = 0;; ++n) {
        const double apriori = cn * h0 / (1.0 - c) + accumulated;
        if (apriori <= tol) return {b.with_resolution(apriori), n, apriori, false, width};
        if (b.size() * images_per_point <= opt.measured_check_limit) {
            const double collage = hausdorff_distance(b, step(b, 0.0)) / (1.0 - c);
            if (collage <= tol) return {b.with_resolution(collage), n, collage, true, width};
        }
        if (n >= opt.max_iterations)
            throw NumericError("no certified convergence after " + std::to_string(n) + " iterations");
        b = step(b, width);
        accumulated = c * accumulated + snap_err;
        cn *= c;
    }
}

/// Attractor of `sys`, certified within tol in Hausdorff distance.
/// The default seed is the fixed point of the first map.
inline FixedPointRun attractor_run(const IfsSystem& sys, double tol, const IterationOptions& opt = {},
                                   std::optional<PointCloud> seed = std::nullopt) {
    PointCloud start = seed ? *seed : PointCloud(sys.dimension(), sys.map(0).fixed_point());
    if (start.dimension() != sys.dimension()) throw StructuralError("seed dimension does not match the IFS");
    auto step = [&](const PointCloud& b, double width) { return hutchinson(sys, b, {width, opt.point_cap}); };
    return iterate_to_tolerance(step, std::move(start), sys.contraction(), tol, sys.size(), opt);
}

inline PointCloud attractor(const IfsSystem& sys, const PointCloud& seed, double tol, const IterationOptions& opt = {}) {
    return attractor_run(sys, tol, opt, seed).cloud;
}

inline PointCloud attractor(const IfsSystem& sys, double tol, const IterationOptions& opt = {}) {
    return attractor_run(sys, tol, opt).cloud;
}

/// Random-iteration orbit with uniform map choice, started at the origin.
/// Resolution records the one-sided bound c^burn_in * (distance from the
/// start to the invariant ball centre + its radius) on how far emitted points
/// can sit from the attractor; coverage is not certified.
inline PointCloud chaos_game(const IfsSystem& sys, std::size_t n_points, std::size_t burn_in, std::uint64_t rng_seed) {
    if (n_points == 0) throw ContractError("chaos game needs at least one point");
    const std::size_t d = sys.dimension();
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<std::size_t> pick(0, sys.size() - 1);
    Vector x(d, 0.0), y(d);
    std::vector<double> flat;
    flat.reserve(n_points * d);
    for (std::size_t n = 0; n < burn_in + n_points; ++n) {
        sys.map(pick(rng)).apply_into(x, y);
        std::swap(x, y);
        if (n >= burn_in) flat.insert(flat.end(), x.begin(), x.end());
    }
    const Box inv = sys.invariant_box();
    Vector centre(d);
    for (std::size_t j = 0; j < d; ++j) centre[j] = 0.5 * (inv.lo[j] + inv.hi[j]);
    const double reach = euclidean(Vector(d, 0.0), centre) + 0.5 * inv.diameter();
    const double eps = std::pow(sys.contraction(), static_cast<double>(burn_in)) * reach;
    return PointCloud(d, std::move(flat), eps);
}

/// Finite product of IFSs acting coordinatewise on the product space.
/// Product maps are enumerated lexicographically over index tuples with
/// the first factor slowest.
class ProductIfs {
public:
    explicit ProductIfs(std::vector<IfsSystem> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw StructuralError("a product IFS needs at least one factor");
    }

    std::size_t factor_count() const { return factors_.size(); }
    const IfsSystem& factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<IfsSystem>& factors() const { return factors_; }

    std::size_t map_count() const {
        std::size_t n = 1;
        for (const auto& f : factors_) n *= f.size();
        return n;
    }

    std::size_t dimension() const {
        std::size_t d = 0;
        for (const auto& f : factors_) d += f.dimension();
        return d;
    }

    std::vector<std::size_t> index_tuple(std::size_t flat) const {
        std::vector<std::size_t> t(factors_.size());
        for (std::size_t k = factors_.size(); k-- > 0;) {
            t[k] = flat % factors_[k].size();
            flat /= factors_[k].size();
        }
        return t;
    }

    /// T_{i_1...i_m}(x) = (w_{1 i_1}(x_1), ..., w_{m i_m}(x_m)); its declared
    /// constant is max_k c_{k i_k}.
    AffineMap map(std::span<const std::size_t> tuple) const {
        if (tuple.size() != factors_.size()) throw StructuralError("index tuple length must equal the factor count");
        std::vector<AffineMap> blocks;
        for (std::size_t k = 0; k < tuple.size(); ++k) blocks.push_back(factors_[k].map(tuple[k]));
        return block_product(blocks);
    }

    /// A product map is flagged a similarity when every factor map is one
    /// and all their ratios agree.
    bool is_similarity(std::span<const std::size_t> tuple) const {
        double ratio = -1.0;
        for (std::size_t k = 0; k < tuple.size(); ++k) {
            const auto& m = factors_[k].map(tuple[k]);
            if (!m.is_similarity()) return false;
            if (ratio >= 0.0 && m.ratio() != ratio) return false;
            ratio = m.ratio();
        }
        return true;
    }

    /// The product system as a single IFS on the product space.
    IfsSystem as_system() const {
        std::vector<AffineMap> maps;
        maps.reserve(map_count());
        for (std::size_t i = 0; i < map_count(); ++i) maps.push_back(map(index_tuple(i)));
        std::string label = "product";
        for (const auto& f : factors_) label += ":" + f.label();
        return IfsSystem(std::move(maps), label);
    }

    double contraction() const {
        double c = 0.0;
        for (const auto& f : factors_) c = std::max(c, f.contraction());
        return c;
    }

private:
    std::vector<IfsSystem> factors_;
};

inline ProductIfs make_product_ifs(std::vector<IfsSystem> systems) {
    if (systems.empty()) throw StructuralError("a product IFS needs at least one factor");
    return ProductIfs(std::move(systems));
}

/// Attractor of the product system iterated directly in the product space.
inline FixedPointRun product_attractor_direct(const ProductIfs& p, double tol, const IterationOptions& opt = {}) {
    return attractor_run(p.as_system(), tol, opt);
}

struct ProductCheckOptions {
    IterationOptions iteration{};
    std::size_t embed_cap = kDefaultEmbedCap;
    /// Added to the first offset coordinate of the first product map on the
    /// direct route only. Non-zero values serve as a negative control.
    double fault_offset = 0.0;
};

struct ProductAttractorReport {
    double distance = 0.0;
    double bound = 0.0;
    bool ok = false;
    std::size_t direct_points = 0;
    std::size_t embedded_points = 0;
    double direct_resolution = 0.0;
    double embedded_resolution = 0.0;
};

/// Compares the directly iterated product attractor with the embedded
/// product of independently computed factor attractors. Passes when their
/// Hausdorff distance is at most 2 tol plus both clouds' resolutions.
inline ProductAttractorReport verify_product_attractor(const ProductIfs& p, double tol, const ProductCheckOptions& opt = {}) {
    std::vector<PointCloud> factors;
    for (const auto& f : p.factors()) factors.push_back(attractor_run(f, tol, opt.iteration).cloud);
    const PointCloud embedded = embed(ProductSet(std::move(factors)), opt.embed_cap);

    IfsSystem direct_sys = p.as_system();
    if (opt.fault_offset != 0.0) direct_sys = direct_sys.with_perturbed_offset(0, 0, opt.fault_offset);
    const PointCloud direct = attractor_run(direct_sys, tol, opt.iteration).cloud;

    ProductAttractorReport r;
    r.distance = hausdorff_distance(direct, embedded);
    r.direct_resolution = direct.resolution();
    r.embedded_resolution = embedded.resolution();
    r.bound = 2.0 * tol + r.direct_resolution + r.embedded_resolution;
    r.ok = r.distance <= r.bound;
    r.direct_points = direct.size();
    r.embedded_points = embedded.size();
    return r;
}

}  // namespace fractal
