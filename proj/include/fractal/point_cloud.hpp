/**
 * @file point_cloud.hpp
 * @brief Finite point sets standing in for nonempty compact sets.
 *
 * A PointCloud is a finite list of points in R^d stored row-major in one
 * flat buffer, together with a resolution eps: the cloud is known to lie
 * within Hausdorff distance eps of the compact set it represents.
 *
 * A ProductSet is an ordered list of factor clouds A_1 x ... x A_m, kept
 * factored. embed() materializes the Cartesian product as a single cloud.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractal/errors.hpp"

namespace fractal {

using Vector = std::vector<double>;

/// Euclidean distance. Every distance in the library goes through this
/// function so that indexed and brute-force searches agree bit for bit.
inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct Box {
    Vector lo;
    Vector hi;

    std::size_t dimension() const { return lo.size(); }

    double diameter() const {
        double acc = 0.0;
        for (std::size_t j = 0; j < lo.size(); ++j) acc += (hi[j] - lo[j]) * (hi[j] - lo[j]);
        return std::sqrt(acc);
    }

    void expand(const Box& other) {
        for (std::size_t j = 0; j < lo.size(); ++j) {
            lo[j] = std::min(lo[j], other.lo[j]);
            hi[j] = std::max(hi[j], other.hi[j]);
        }
    }
};

class PointCloud {
public:
    PointCloud(std::size_t dimension, std::vector<double> coords, double resolution = 0.0)
        : dim_(dimension), coords_(std::move(coords)), resolution_(resolution) {
        if (dim_ == 0) throw StructuralError("point cloud dimension must be at least 1");
        if (coords_.empty()) throw StructuralError("point cloud must be nonempty");
        if (coords_.size() % dim_ != 0)
            throw StructuralError("coordinate buffer length is not a multiple of the dimension");
        if (!all_finite(coords_)) throw StructuralError("point cloud contains non-finite coordinates");
        if (!(resolution_ >= 0.0) || !std::isfinite(resolution_))
            throw StructuralError("point cloud resolution must be finite and nonnegative");
    }

    static PointCloud from_points(const std::vector<Vector>& points, double resolution = 0.0) {
        if (points.empty()) throw StructuralError("point cloud must be nonempty");
        const std::size_t d = points.front().size();
        std::vector<double> flat;
        flat.reserve(points.size() * d);
        for (const auto& p : points) {
            if (p.size() != d) throw StructuralError("points of a cloud must share one dimension");
            flat.insert(flat.end(), p.begin(), p.end());
        }
        return PointCloud(d, std::move(flat), resolution);
    }

    /// Uniform net of the axis box [lo, hi] with at most `spacing` between
    /// neighbours along each axis; resolution is half the grid diagonal.
    static PointCloud grid(const Vector& lo, const Vector& hi, double spacing) {
        if (lo.size() != hi.size() || lo.empty()) throw StructuralError("grid bounds mismatch");
        if (!(spacing > 0.0)) throw ContractError("grid spacing must be positive");
        const std::size_t d = lo.size();
        std::vector<std::size_t> counts(d);
        std::vector<double> step(d);
        double diag = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (hi[j] < lo[j]) throw StructuralError("grid bounds are inverted");
            const double extent = hi[j] - lo[j];
            counts[j] = extent > 0.0 ? static_cast<std::size_t>(std::ceil(extent / spacing)) + 1 : 1;
            step[j] = counts[j] > 1 ? extent / static_cast<double>(counts[j] - 1) : 0.0;
            diag += step[j] * step[j];
        }
        std::size_t total = 1;
        for (auto c : counts) total *= c;
        std::vector<double> flat;
        flat.reserve(total * d);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t n = 0; n < total; ++n) {
            for (std::size_t j = 0; j < d; ++j)
                flat.push_back(idx[j] + 1 == counts[j] && counts[j] > 1 ? hi[j] : lo[j] + step[j] * idx[j]);
            for (std::size_t j = d; j-- > 0;) {
                if (++idx[j] < counts[j]) break;
                idx[j] = 0;
            }
        }
        return PointCloud(d, std::move(flat), 0.5 * std::sqrt(diag));
    }

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return coords_.size() / dim_; }
    double resolution() const { return resolution_; }
    const std::vector<double>& coords() const { return coords_; }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }

    Vector point_vector(std::size_t i) const {
        auto p = point(i);
        return {p.begin(), p.end()};
    }

    PointCloud with_resolution(double eps) const { return PointCloud(dim_, coords_, eps); }

    Box bounding_box() const {
        Box box{Vector(point(0).begin(), point(0).end()), Vector(point(0).begin(), point(0).end())};
        for (std::size_t i = 1; i < size(); ++i) {
            auto p = point(i);
            for (std::size_t j = 0; j < dim_; ++j) {
                box.lo[j] = std::min(box.lo[j], p[j]);
                box.hi[j] = std::max(box.hi[j], p[j]);
            }
        }
        return box;
    }

    /// Sorted, duplicate-free list of points; two clouds represent the same
    /// finite set iff their canonical forms compare equal.
    std::vector<Vector> canonical() const {
        std::vector<Vector> pts;
        pts.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) pts.push_back(point_vector(i));
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    /// Copy with exact duplicate points removed (first occurrence order is not kept).
    PointCloud deduplicated() const {
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto less = [&](std::size_t a, std::size_t b) {
            auto pa = point(a), pb = point(b);
            return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
        };
        auto same = [&](std::size_t a, std::size_t b) {
            auto pa = point(a), pb = point(b);
            return std::equal(pa.begin(), pa.end(), pb.begin());
        };
        std::sort(order.begin(), order.end(), less);
        order.erase(std::unique(order.begin(), order.end(), same), order.end());
        std::vector<double> flat;
        flat.reserve(order.size() * dim_);
        for (auto i : order) flat.insert(flat.end(), point(i).begin(), point(i).end());
        return PointCloud(dim_, std::move(flat), resolution_);
    }

    /// Projection onto the coordinate range [first, first + count).
    PointCloud project(std::size_t first, std::size_t count) const {
        if (count == 0 || first + count > dim_) throw StructuralError("projection range out of bounds");
        std::vector<double> flat;
        flat.reserve(size() * count);
        for (std::size_t i = 0; i < size(); ++i) {
            auto p = point(i);
            flat.insert(flat.end(), p.begin() + static_cast<std::ptrdiff_t>(first),
                        p.begin() + static_cast<std::ptrdiff_t>(first + count));
        }
        return PointCloud(count, std::move(flat), resolution_);
    }

private:
    std::size_t dim_;
    std::vector<double> coords_;
    double resolution_;
};

inline bool same_point_set(const PointCloud& a, const PointCloud& b) {
    return a.dimension() == b.dimension() && a.canonical() == b.canonical();
}

inline bool is_subset(const PointCloud& a, const PointCloud& b) {
    if (a.dimension() != b.dimension()) return false;
    const auto ca = a.canonical();
    const auto cb = b.canonical();
    return std::includes(cb.begin(), cb.end(), ca.begin(), ca.end());
}

/// Union of clouds; resolution is the largest input resolution.
inline PointCloud merge(std::span<const PointCloud> clouds) {
    if (clouds.empty()) throw StructuralError("cannot merge an empty list of clouds");
    const std::size_t d = clouds.front().dimension();
    std::vector<double> flat;
    double eps = 0.0;
    for (const auto& c : clouds) {
        if (c.dimension() != d) throw StructuralError("merged clouds must share one dimension");
        flat.insert(flat.end(), c.coords().begin(), c.coords().end());
        eps = std::max(eps, c.resolution());
    }
    return PointCloud(d, std::move(flat), eps);
}

inline PointCloud merge(const PointCloud& a, const PointCloud& b) {
    const PointCloud both[] = {a, b};
    return merge(std::span<const PointCloud>(both));
}

/// A point of a product space: one coordinate vector per factor.
class ProductPoint {
public:
    explicit ProductPoint(std::vector<Vector> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw StructuralError("product point needs at least one factor");
        for (const auto& f : factors_) {
            if (f.empty()) throw StructuralError("each factor of a product point needs a coordinate");
            if (!all_finite(f)) throw StructuralError("product point contains non-finite coordinates");
        }
    }

    std::size_t factor_count() const { return factors_.size(); }
    const Vector& factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<Vector>& factors() const { return factors_; }

    bool same_structure(const ProductPoint& other) const {
        if (factors_.size() != other.factors_.size()) return false;
        for (std::size_t k = 0; k < factors_.size(); ++k)
            if (factors_[k].size() != other.factors_[k].size()) return false;
        return true;
    }

private:
    std::vector<Vector> factors_;
};

/// Default limit on the number of points embed() may materialize.
inline constexpr std::size_t kDefaultEmbedCap = 10'000'000;

class ProductSet {
public:
    explicit ProductSet(std::vector<PointCloud> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw StructuralError("product set needs at least one factor");
    }

    std::size_t factor_count() const { return factors_.size(); }
    const PointCloud& factor(std::size_t k) const { return factors_.at(k); }
    const std::vector<PointCloud>& factors() const { return factors_; }

    std::size_t total_dimension() const {
        std::size_t d = 0;
        for (const auto& f : factors_) d += f.dimension();
        return d;
    }

    bool same_structure(const ProductSet& other) const {
        if (factors_.size() != other.factors_.size()) return false;
        for (std::size_t k = 0; k < factors_.size(); ++k)
            if (factors_[k].dimension() != other.factors_[k].dimension()) return false;
        return true;
    }

private:
    std::vector<PointCloud> factors_;
};

/// Cartesian product of the factor clouds as one cloud in the product space.
/// Points are ordered lexicographically by factor index (first factor
/// slowest). Resolution is the root-sum-of-squares of factor resolutions.
inline PointCloud embed(const ProductSet& set, std::size_t cap = kDefaultEmbedCap) {
    double total = 1.0;
    for (const auto& f : set.factors()) total *= static_cast<double>(f.size());
    if (total > static_cast<double>(cap))
        throw CapacityError("embedding would produce " + std::to_string(static_cast<long double>(total)) +
                            " points, above the cap of " + std::to_string(cap));

    const std::size_t m = set.factor_count();
    const std::size_t d = set.total_dimension();
    const auto n = static_cast<std::size_t>(total);
    std::vector<double> flat;
    flat.reserve(n * d);
    std::vector<std::size_t> idx(m, 0);
    for (std::size_t count = 0; count < n; ++count) {
        for (std::size_t k = 0; k < m; ++k) {
            auto p = set.factor(k).point(idx[k]);
            flat.insert(flat.end(), p.begin(), p.end());
        }
        for (std::size_t k = m; k-- > 0;) {
            if (++idx[k] < set.factor(k).size()) break;
            idx[k] = 0;
        }
    }
    double eps2 = 0.0;
    for (const auto& f : set.factors()) eps2 += f.resolution() * f.resolution();
    return PointCloud(d, std::move(flat), std::sqrt(eps2));
}

}  // namespace fractal
