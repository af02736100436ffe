#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fractal/errors.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

/// Spectral norm of a row-major square matrix.
inline double operator_norm(std::span<const double> row_major, std::size_t d) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(row_major.data(),
                                                                                                static_cast<Eigen::Index>(d),
                                                                                                static_cast<Eigen::Index>(d));
    const Eigen::MatrixXd gram = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

/// Contraction x -> linear * x + offset with a declared Lipschitz constant.
///
/// The declared constant must lie in [0, 1) and bound the spectral norm of
/// the linear part to within 1e-9; both are checked at construction.
class AffineMap {
public:
    static constexpr double kNormSlack = 1e-9;

    AffineMap(std::vector<double> linear_row_major, Vector offset, double lipschitz)
        : dim_(offset.size()), linear_(std::move(linear_row_major)), offset_(std::move(offset)), lipschitz_(lipschitz) {
        if (dim_ == 0) throw StructuralError("affine map needs dimension at least 1");
        if (linear_.size() != dim_ * dim_) throw StructuralError("linear part must be a square matrix matching the offset");
        if (!all_finite(linear_) || !all_finite(offset_)) throw StructuralError("affine map has non-finite coefficients");
        if (!(lipschitz_ >= 0.0 && lipschitz_ < 1.0))
            throw ContractError("declared Lipschitz constant must lie in [0, 1), got " + std::to_string(lipschitz_));
        norm_ = operator_norm(linear_, dim_);
        if (norm_ > lipschitz_ + kNormSlack)
            throw ContractError("operator norm " + std::to_string(norm_) + " exceeds declared Lipschitz constant " +
                                std::to_string(lipschitz_));
    }

    /// Map x -> scale * x + offset, declared with Lipschitz constant |scale|.
    static AffineMap similarity(double scale, Vector offset) {
        const std::size_t d = offset.size();
        std::vector<double> lin(d * d, 0.0);
        for (std::size_t j = 0; j < d; ++j) lin[j * d + j] = scale;
        return AffineMap(std::move(lin), std::move(offset), std::abs(scale));
    }

    static AffineMap diagonal(const Vector& scales, Vector offset) {
        const std::size_t d = offset.size();
        if (scales.size() != d) throw StructuralError("diagonal scales must match the offset dimension");
        std::vector<double> lin(d * d, 0.0);
        double c = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            lin[j * d + j] = scales[j];
            c = std::max(c, std::abs(scales[j]));
        }
        return AffineMap(std::move(lin), std::move(offset), c);
    }

    std::size_t dimension() const { return dim_; }
    const std::vector<double>& linear() const { return linear_; }
    const Vector& offset() const { return offset_; }
    double lipschitz() const { return lipschitz_; }
    double norm() const { return norm_; }
    double linear_at(std::size_t row, std::size_t col) const { return linear_[row * dim_ + col]; }

    bool is_diagonal() const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c)
                if (r != c && linear_[r * dim_ + c] != 0.0) return false;
        return true;
    }

    /// Diagonal linear part with equal entries.
    bool is_similarity() const {
        if (!is_diagonal()) return false;
        for (std::size_t j = 1; j < dim_; ++j)
            if (std::abs(linear_[j * dim_ + j]) != std::abs(linear_[0])) return false;
        return true;
    }

    /// Similarity ratio; only meaningful when is_similarity().
    double ratio() const { return std::abs(linear_[0]); }

    /// out = linear * x + offset. Rows are summed left to right from zero.
    void apply_into(std::span<const double> x, std::span<double> out) const {
        for (std::size_t r = 0; r < dim_; ++r) {
            double acc = 0.0;
            const double* row = linear_.data() + r * dim_;
            for (std::size_t c = 0; c < dim_; ++c) acc += row[c] * x[c];
            out[r] = acc + offset_[r];
        }
    }

    Vector operator()(std::span<const double> x) const {
        if (x.size() != dim_) throw StructuralError("point dimension does not match the map");
        Vector out(dim_);
        apply_into(x, out);
        return out;
    }

    /// Image of a cloud; resolution scales by the Lipschitz constant.
    PointCloud operator()(const PointCloud& cloud) const {
        if (cloud.dimension() != dim_) throw StructuralError("cloud dimension does not match the map");
        std::vector<double> flat(cloud.coords().size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            apply_into(cloud.point(i), {flat.data() + i * dim_, dim_});
        return PointCloud(dim_, std::move(flat), lipschitz_ * cloud.resolution());
    }

    /// this o inner, i.e. x -> this(inner(x)). Lipschitz constants multiply.
    AffineMap compose(const AffineMap& inner) const {
        if (inner.dim_ != dim_) throw StructuralError("composed maps must share a dimension");
        std::vector<double> lin(dim_ * dim_, 0.0);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < dim_; ++k) acc += linear_[r * dim_ + k] * inner.linear_[k * dim_ + c];
                lin[r * dim_ + c] = acc;
            }
        Vector off(dim_);
        apply_into(inner.offset_, off);
        return AffineMap(std::move(lin), std::move(off), lipschitz_ * inner.lipschitz_);
    }

    /// Unique fixed point, solving (I - linear) x = offset.
    Vector fixed_point() const {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
            linear_.data(), static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_)) - m;
        const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(offset_.data(), static_cast<Eigen::Index>(dim_));
        const Eigen::VectorXd x = a.partialPivLu().solve(t);
        return Vector(x.data(), x.data() + dim_);
    }

    AffineMap with_offset(Vector offset) const { return AffineMap(linear_, std::move(offset), lipschitz_); }

private:
    std::size_t dim_;
    std::vector<double> linear_;
    Vector offset_;
    double lipschitz_;
    double norm_ = 0.0;
};

/// Block-diagonal map acting factor by factor on a product space.
inline AffineMap block_product(std::span<const AffineMap> blocks) {
    if (blocks.empty()) throw StructuralError("block product needs at least one map");
    std::size_t d = 0;
    double c = 0.0;
    for (const auto& b : blocks) {
        d += b.dimension();
        c = std::max(c, b.lipschitz());
    }
    std::vector<double> lin(d * d, 0.0);
    Vector off;
    off.reserve(d);
    std::size_t base = 0;
    for (const auto& b : blocks) {
        const std::size_t bd = b.dimension();
        for (std::size_t r = 0; r < bd; ++r)
            for (std::size_t col = 0; col < bd; ++col) lin[(base + r) * d + base + col] = b.linear_at(r, col);
        off.insert(off.end(), b.offset().begin(), b.offset().end());
        base += bd;
    }
    return AffineMap(std::move(lin), std::move(off), c);
}

}  // namespace fractal
