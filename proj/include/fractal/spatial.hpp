/**
 * @file spatial.hpp
 * @brief Uniform-grid nearest-neighbour index and integer lattice cell sets.
 *
 * GridIndex answers exact nearest-neighbour queries by scanning Chebyshev
 * rings of cells around the query. Distances are computed with euclidean(),
 * so any minimum it returns is bit-identical to a brute-force scan.
 *
 * CellSet records which cells of an integer lattice are occupied. It uses a
 * dense bitmap when the lattice box is small enough and an open-addressing
 * hash table otherwise.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "fractal/errors.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

class GridIndex {
public:
    explicit GridIndex(const PointCloud& cloud) : dim_(cloud.dimension()), n_(cloud.size()) {
        const Box box = cloud.bounding_box();
        lo_ = box.lo;
        choose_cell_size(box);

        if (n_ >= std::numeric_limits<std::uint32_t>::max())
            throw CapacityError("grid index supports fewer than 2^32 points");
        std::vector<std::uint32_t> cell_of(n_);
        for (std::size_t i = 0; i < n_; ++i) cell_of[i] = linear_cell(cloud.point(i));

        start_.assign(total_cells_ + 1, 0);
        for (auto c : cell_of) ++start_[c + 1];
        std::partial_sum(start_.begin(), start_.end(), start_.begin());

        std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
        points_.resize(n_ * dim_);
        for (std::size_t i = 0; i < n_; ++i) {
            auto p = cloud.point(i);
            std::copy(p.begin(), p.end(), points_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(fill[cell_of[i]]++) * dim_));
        }
    }

    std::size_t size() const { return n_; }
    double cell_size() const { return cell_; }

    /// Distance from q to the nearest indexed point.
    ///
    /// If `accept_at_most` >= 0 the search may return early with any distance
    /// <= accept_at_most. If the true minimum is >= `give_up_at`, the search
    /// may stop and return a value >= give_up_at. Otherwise the exact minimum
    /// is returned.
    double nearest(std::span<const double> q, double accept_at_most = -1.0,
                   double give_up_at = std::numeric_limits<double>::infinity()) const {
        std::vector<std::int64_t> qc(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            const double t = std::floor((q[j] - lo_[j]) / cell_);
            qc[j] = static_cast<std::int64_t>(std::clamp(t, -4.0e15, 4.0e15));
        }
        // Chebyshev distances from the query cell to the nearest and the
        // farthest grid cell; rings below the first hold no cells.
        std::int64_t first_ring = 0, max_ring = 0;
        for (std::size_t j = 0; j < dim_; ++j) {
            first_ring = std::max({first_ring, -qc[j], qc[j] - (ncell_[j] - 1)});
            max_ring = std::max({max_ring, std::abs(qc[j]), std::abs(ncell_[j] - 1 - qc[j])});
        }

        double best = std::numeric_limits<double>::infinity();
        auto scan_cell = [&](std::uint64_t lin) {
            for (auto k = start_[lin]; k < start_[lin + 1]; ++k) {
                const double d = euclidean(q, {points_.data() + static_cast<std::size_t>(k) * dim_, dim_});
                if (d < best) best = d;
            }
        };

        const std::size_t last = dim_ - 1;
        const double budget = 2.0 * static_cast<double>(n_ + total_cells_) + 64.0;
        double work = 0.0;
        std::vector<std::int64_t> lo(dim_), hi(dim_), c(dim_);
        for (std::int64_t r = first_ring; r <= max_ring; ++r) {
            bool any = true;
            for (std::size_t j = 0; j < dim_; ++j) {
                lo[j] = std::max<std::int64_t>(qc[j] - r, 0);
                hi[j] = std::min<std::int64_t>(qc[j] + r, ncell_[j] - 1);
                if (lo[j] > hi[j]) any = false;
            }
            if (any) {
                double rows = 1.0;
                for (std::size_t j = 0; j < last; ++j) rows *= static_cast<double>(hi[j] - lo[j] + 1);
                work += rows;
                if (work > budget) return brute_force(q, best);
                // Odometer over every axis but the last; along the last axis
                // either the full range (prefix on the ring shell) or only
                // the two shell ends.
                std::copy(lo.begin(), lo.end(), c.begin());
                while (true) {
                    bool on_shell = false;
                    std::uint64_t prefix = 0;
                    for (std::size_t j = 0; j < last; ++j) {
                        if (std::abs(c[j] - qc[j]) == r) on_shell = true;
                        prefix = prefix * static_cast<std::uint64_t>(ncell_[j]) + static_cast<std::uint64_t>(c[j]);
                    }
                    const std::uint64_t row = prefix * static_cast<std::uint64_t>(ncell_[last]);
                    if (on_shell) {
                        for (std::int64_t t = lo[last]; t <= hi[last]; ++t) scan_cell(row + static_cast<std::uint64_t>(t));
                    } else {
                        const std::int64_t a = qc[last] - r, b = qc[last] + r;
                        if (a >= lo[last] && a <= hi[last]) scan_cell(row + static_cast<std::uint64_t>(a));
                        if (b != a && b >= lo[last] && b <= hi[last]) scan_cell(row + static_cast<std::uint64_t>(b));
                    }
                    if (best <= accept_at_most) return best;

                    std::size_t j = last;
                    bool done = true;
                    while (j-- > 0) {
                        if (c[j] < hi[j]) {
                            ++c[j];
                            done = false;
                            break;
                        }
                        c[j] = lo[j];
                    }
                    if (done) break;
                }
            }
            // Every unvisited point lies at distance >= r * cell from q.
            const double bound = static_cast<double>(r) * cell_ * (1.0 - 1e-12);
            if (best <= bound) return best;
            if (bound >= give_up_at) return best;
        }
        return best;
    }

private:
    double brute_force(std::span<const double> q, double best) const {
        for (std::size_t k = 0; k < n_; ++k) {
            const double d = euclidean(q, {points_.data() + k * dim_, dim_});
            if (d < best) best = d;
        }
        return best;
    }

    void choose_cell_size(const Box& box) {
        const double target = std::max(16.0, static_cast<double>(n_));
        double max_extent = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) max_extent = std::max(max_extent, box.hi[j] - box.lo[j]);
        if (max_extent <= 0.0) {
            cell_ = 1.0;
        } else {
            // Largest-to-smallest search for the finest cell keeping the grid within target.
            double hi_c = max_extent * 2.0;
            double lo_c = max_extent / target / 4.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = std::sqrt(hi_c * lo_c);
                if (cells_for(box, mid) <= target) hi_c = mid;
                else lo_c = mid;
            }
            cell_ = hi_c;
        }
        ncell_.resize(dim_);
        total_cells_ = 1;
        for (std::size_t j = 0; j < dim_; ++j) {
            ncell_[j] = static_cast<std::int64_t>(std::floor((box.hi[j] - box.lo[j]) / cell_)) + 1;
            total_cells_ *= static_cast<std::uint64_t>(ncell_[j]);
        }
    }

    double cells_for(const Box& box, double h) const {
        double total = 1.0;
        for (std::size_t j = 0; j < dim_; ++j) total *= std::floor((box.hi[j] - box.lo[j]) / h) + 1.0;
        return total;
    }

    std::uint32_t linear_cell(std::span<const double> p) const {
        std::uint64_t lin = 0;
        for (std::size_t j = 0; j < dim_; ++j) {
            auto c = static_cast<std::int64_t>(std::floor((p[j] - lo_[j]) / cell_));
            c = std::clamp<std::int64_t>(c, 0, ncell_[j] - 1);
            lin = lin * static_cast<std::uint64_t>(ncell_[j]) + static_cast<std::uint64_t>(c);
        }
        return static_cast<std::uint32_t>(lin);
    }

    std::size_t dim_;
    std::size_t n_;
    Vector lo_;
    double cell_ = 1.0;
    std::vector<std::int64_t> ncell_;
    std::uint64_t total_cells_ = 1;
    std::vector<std::uint32_t> start_;
    std::vector<double> points_;
};

/// Set of occupied cells of an integer lattice restricted to a box [lo, hi].
class CellSet {
public:
    static constexpr double kMaxBitmapCells = 2147483648.0;  // 2^31 bits = 256 MiB

    CellSet(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size() || lo_.empty()) throw StructuralError("cell set bounds mismatch");
        double total = 1.0;
        extent_.resize(lo_.size());
        for (std::size_t j = 0; j < lo_.size(); ++j) {
            if (hi_[j] < lo_[j]) throw StructuralError("cell set bounds are inverted");
            extent_[j] = static_cast<std::uint64_t>(hi_[j] - lo_[j]) + 1;
            total *= static_cast<double>(extent_[j]);
        }
        if (total <= kMaxBitmapCells) {
            mode_ = Mode::Bitmap;
            bits_.assign(static_cast<std::size_t>((total + 63.0) / 64.0), 0);
        } else if (total < 1.8e19) {
            mode_ = Mode::Hash;
            table_.assign(1024, kEmpty);
        } else {
            mode_ = Mode::Tree;
        }
    }

    /// Inserts a cell; returns true when it was not present before.
    bool insert(std::span<const std::int64_t> cell) {
        for (std::size_t j = 0; j < lo_.size(); ++j)
            if (cell[j] < lo_[j] || cell[j] > hi_[j]) throw StructuralError("cell outside the declared lattice box");
        bool fresh = false;
        switch (mode_) {
            case Mode::Bitmap: {
                const std::uint64_t lin = linear(cell);
                const std::uint64_t mask = std::uint64_t{1} << (lin & 63);
                auto& word = bits_[lin >> 6];
                fresh = (word & mask) == 0;
                word |= mask;
                break;
            }
            case Mode::Hash:
                fresh = hash_insert(linear(cell));
                break;
            case Mode::Tree:
                fresh = tree_.insert(std::vector<std::int64_t>(cell.begin(), cell.end())).second;
                break;
        }
        if (fresh) ++count_;
        return fresh;
    }

    std::size_t size() const { return count_; }

private:
    enum class Mode { Bitmap, Hash, Tree };
    static constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();

    std::uint64_t linear(std::span<const std::int64_t> cell) const {
        std::uint64_t lin = 0;
        for (std::size_t j = 0; j < lo_.size(); ++j)
            lin = lin * extent_[j] + static_cast<std::uint64_t>(cell[j] - lo_[j]);
        return lin;
    }

    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        x *= 0xc4ceb9fe1a85ec53ULL;
        x ^= x >> 33;
        return x;
    }

    bool hash_insert(std::uint64_t key) {
        if ((count_ + 1) * 2 > table_.size()) grow();
        const std::size_t mask = table_.size() - 1;
        for (std::size_t pos = mix(key) & mask;; pos = (pos + 1) & mask) {
            if (table_[pos] == key) return false;
            if (table_[pos] == kEmpty) {
                table_[pos] = key;
                return true;
            }
        }
    }

    void grow() {
        std::vector<std::uint64_t> old(table_.size() * 2, kEmpty);
        old.swap(table_);
        const std::size_t mask = table_.size() - 1;
        for (auto key : old) {
            if (key == kEmpty) continue;
            std::size_t pos = mix(key) & mask;
            while (table_[pos] != kEmpty) pos = (pos + 1) & mask;
            table_[pos] = key;
        }
    }

    std::vector<std::int64_t> lo_, hi_;
    std::vector<std::uint64_t> extent_;
    Mode mode_ = Mode::Bitmap;
    std::vector<std::uint64_t> bits_;
    std::vector<std::uint64_t> table_;
    std::set<std::vector<std::int64_t>> tree_;
    std::size_t count_ = 0;
};

}  // namespace fractal
