/**
 * @file fif.hpp
 * @brief Fractal interpolation functions and their coordinatewise products.
 *
 * For knots x_0 < ... < x_N with values y_n the maps on interval n are
 *
 *     L_n(x)    = a_n x + b_n,            L_n(x_0) = x_{n-1}, L_n(x_N) = x_n
 *     F_n(x, y) = alpha_n y + c_n x + e_n, F_n(x_0, y_0) = y_{n-1}, F_n(x_N, y_N) = y_n
 *
 * and the Read-Bajraktarevic operator is (T f)(x) = F_n(L_n^-1(x), f(L_n^-1(x)))
 * on [x_{n-1}, x_n]. Its fixed point is the fractal interpolation function.
 * Functions are sampled on a uniform grid and read between samples by
 * linear interpolation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fractal/errors.hpp"

namespace fractal {

struct InterpolationData {
    std::vector<double> x;
    std::vector<double> y;

    InterpolationData() = default;
    InterpolationData(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
        if (x.size() != y.size()) throw StructuralError("knot and value counts differ");
        if (x.size() < 2) throw StructuralError("interpolation data needs at least two knots");
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw StructuralError("interpolation data must be finite");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1])) throw StructuralError("knots must be strictly increasing");
    }

    std::size_t intervals() const { return x.size() - 1; }
};

struct FifPiece {
    double a = 0.0;      ///< L_n slope
    double b = 0.0;      ///< L_n intercept
    double alpha = 0.0;  ///< vertical scaling
    double c = 0.0;      ///< F_n slope in x
    double e = 0.0;      ///< F_n intercept

    double L(double x) const { return a * x + b; }
    double L_inverse(double x) const { return (x - b) / a; }
    double F(double x, double y) const { return alpha * y + c * x + e; }
};

struct FifMaps {
    InterpolationData data;
    std::vector<FifPiece> pieces;

    double x0() const { return data.x.front(); }
    double xN() const { return data.x.back(); }
    double y0() const { return data.y.front(); }
    double yN() const { return data.y.back(); }
    std::size_t intervals() const { return pieces.size(); }

    /// Lipschitz records: L_n in x, F_n in x, F_n in y.
    std::vector<double> c_records() const {
        std::vector<double> r;
        for (const auto& p : pieces) r.push_back(std::abs(p.a));
        return r;
    }
    std::vector<double> a_records() const {
        std::vector<double> r;
        for (const auto& p : pieces) r.push_back(std::abs(p.c));
        return r;
    }
    std::vector<double> b_records() const {
        std::vector<double> r;
        for (const auto& p : pieces) r.push_back(std::abs(p.alpha));
        return r;
    }
};

inline constexpr double kEndpointTol = 1e-12;

inline double endpoint_scale(double v) { return std::max(1.0, std::abs(v)); }

inline FifMaps build_fif_maps(const InterpolationData& data, const std::vector<double>& alphas) {
    const std::size_t n = data.intervals();
    if (alphas.size() != n)
        throw StructuralError("need " + std::to_string(n) + " vertical scalings, got " + std::to_string(alphas.size()));
    FifMaps maps{data, {}};
    const double x0 = data.x.front(), xN = data.x.back(), y0 = data.y.front(), yN = data.y.back();
    const double span = xN - x0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double alpha = alphas[i - 1];
        if (!(std::abs(alpha) < 1.0))
            throw ContractError("vertical scaling " + std::to_string(alpha) + " must satisfy |alpha| < 1");
        FifPiece p;
        p.a = (data.x[i] - data.x[i - 1]) / span;
        p.b = data.x[i - 1] - p.a * x0;
        p.alpha = alpha;
        p.c = ((data.y[i] - data.y[i - 1]) - alpha * (yN - y0)) / span;
        p.e = data.y[i - 1] - alpha * y0 - p.c * x0;
        maps.pieces.push_back(p);
    }
    return maps;
}

struct ThetaReport {
    double theta = 1.0;
    double a = 0.0;
    double b = 0.0;
    double lambda = 0.0;
    bool adjusted = false;  ///< theta was shrunk to make a < 1
    std::string note;
};

/// theta = min(1 - c_n) / max a_n, a = max(c_n + theta a_n), b = max b_n,
/// lambda = max(a, b). When a reaches 1, theta is replaced by
/// (1 - 1e-6) (1 - max c_n) / max a_n.
inline ThetaReport theta_and_contraction(const std::vector<double>& c, const std::vector<double>& a,
                                         const std::vector<double>& b) {
    if (c.empty() || c.size() != a.size() || c.size() != b.size())
        throw StructuralError("Lipschitz record lists must be nonempty and of equal length");
    ThetaReport r;
    const double max_c = *std::max_element(c.begin(), c.end());
    const double max_a = *std::max_element(a.begin(), a.end());
    if (!(max_c < 1.0)) throw ContractError("L_n Lipschitz records must be below 1");
    r.b = *std::max_element(b.begin(), b.end());
    auto a_for = [&](double theta) {
        double v = 0.0;
        for (std::size_t n = 0; n < c.size(); ++n) v = std::max(v, c[n] + theta * a[n]);
        return v;
    };
    if (max_a == 0.0) {
        r.theta = 1.0;
        r.note = "no x-coupling in F_n; theta fixed at 1";
    } else {
        double min_gap = std::numeric_limits<double>::infinity();
        for (double cn : c) min_gap = std::min(min_gap, 1.0 - cn);
        r.theta = min_gap / max_a;
        if (a_for(r.theta) >= 1.0) {
            r.theta *= (1.0 - 1e-6) * (1.0 - max_c) / (r.theta * max_a);
            r.adjusted = true;
            r.note = "a reached 1; theta shrunk for strict contraction";
        }
    }
    r.a = a_for(r.theta);
    r.lambda = std::max(r.a, r.b);
    if (!(r.lambda < 1.0)) {
        std::ostringstream msg;
        msg << "contraction factor " << r.lambda << " is not below 1";
        throw NumericError(msg.str());
    }
    return r;
}

inline ThetaReport theta_and_contraction(const FifMaps& maps) {
    return theta_and_contraction(maps.c_records(), maps.a_records(), maps.b_records());
}

/// Uniform samples of a function on [x0, xN] with M + 1 points.
class SampledFunction {
public:
    SampledFunction(double x0, double xN, std::vector<double> values) : x0_(x0), xN_(xN), values_(std::move(values)) {
        if (!(xN_ > x0_)) throw StructuralError("sampled function needs x0 < xN");
        if (values_.size() < 2) throw StructuralError("sampled function needs at least two samples");
    }

    double x0() const { return x0_; }
    double xN() const { return xN_; }
    std::size_t grid() const { return values_.size() - 1; }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_.at(i); }

    double x_at(std::size_t i) const {
        if (i == grid()) return xN_;
        return x0_ + (xN_ - x0_) * static_cast<double>(i) / static_cast<double>(grid());
    }

    /// Linear interpolation between samples; clamps outside [x0, xN].
    double operator()(double x) const {
        const double t = (x - x0_) / (xN_ - x0_) * static_cast<double>(grid());
        if (t <= 0.0) return values_.front();
        if (t >= static_cast<double>(grid())) return values_.back();
        const auto i = static_cast<std::size_t>(t);
        const double f = t - static_cast<double>(i);
        if (f == 0.0) return values_[i];
        return values_[i] + f * (values_[i + 1] - values_[i]);
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    double x0_, xN_;
    std::vector<double> values_;
};

inline double sup_distance(const SampledFunction& f, const SampledFunction& g) {
    if (f.grid() != g.grid()) throw StructuralError("sampled functions use different grids");
    double m = 0.0;
    for (std::size_t i = 0; i <= f.grid(); ++i) m = std::max(m, std::abs(f.value(i) - g.value(i)));
    return m;
}

/// Piecewise-linear interpolant of the knots sampled on M + 1 points.
inline SampledFunction linear_interpolant(const InterpolationData& data, std::size_t m) {
    if (m < data.intervals()) throw ContractError("grid size must be at least the number of intervals");
    const double x0 = data.x.front(), xN = data.x.back();
    std::vector<double> v(m + 1);
    std::size_t n = 1;
    for (std::size_t i = 0; i <= m; ++i) {
        const double x = i == m ? xN : x0 + (xN - x0) * static_cast<double>(i) / static_cast<double>(m);
        while (n < data.intervals() && x > data.x[n]) ++n;
        const double t = (x - data.x[n - 1]) / (data.x[n] - data.x[n - 1]);
        v[i] = data.y[n - 1] + t * (data.y[n] - data.y[n - 1]);
    }
    v.front() = data.y.front();
    v.back() = data.y.back();
    return SampledFunction(x0, xN, std::move(v));
}

inline bool is_pinned(const FifMaps& maps, const SampledFunction& f) {
    return std::abs(f.values().front() - maps.y0()) <= kEndpointTol * endpoint_scale(maps.y0()) &&
           std::abs(f.values().back() - maps.yN()) <= kEndpointTol * endpoint_scale(maps.yN());
}

/// One application of the Read-Bajraktarevic operator on f's grid.
inline SampledFunction rb_apply(const FifMaps& maps, const SampledFunction& f) {
    if (f.x0() != maps.x0() || f.xN() != maps.xN()) throw StructuralError("function domain does not match the knots");
    if (!is_pinned(maps, f)) throw ContractError("input function is not pinned to the end values");
    const std::size_t m = f.grid();
    std::vector<double> out(m + 1);
    std::size_t n = 1;
    const auto& xs = maps.data.x;
    for (std::size_t i = 0; i <= m; ++i) {
        const double x = f.x_at(i);
        while (n < maps.intervals() && x > xs[n]) ++n;
        const FifPiece& p = maps.pieces[n - 1];
        const double u = p.L_inverse(x);
        out[i] = p.F(u, f(u));
    }
    out.front() = maps.y0();
    out.back() = maps.yN();
    return SampledFunction(f.x0(), f.xN(), std::move(out));
}

struct FifRun {
    SampledFunction g;
    std::size_t iterations = 0;
    std::vector<double> increments;  ///< sup-norm change per step
    double measured_ratio = 0.0;     ///< largest ratio of successive increments
};

/// Iterates the operator from the linear interpolant until the sup-norm
/// change is at most tol (1 - b).
inline FifRun fif_fixed_point(const FifMaps& maps, std::size_t m = 4096, double tol = 1e-8,
                              std::size_t max_iterations = 100'000) {
    if (!(tol > 0.0)) throw ContractError("tolerance must be positive");
    const ThetaReport th = theta_and_contraction(maps);
    FifRun run{linear_interpolant(maps.data, m), 0, {}, 0.0};
    std::size_t growing = 0;
    while (true) {
        SampledFunction next = rb_apply(maps, run.g);
        const double delta = sup_distance(next, run.g);
        run.g = std::move(next);
        ++run.iterations;
        if (!run.increments.empty() && run.increments.back() > 0.0) {
            const double ratio = delta / run.increments.back();
            run.measured_ratio = std::max(run.measured_ratio, ratio);
            growing = ratio > 1.0 ? growing + 1 : 0;
            if (growing >= 5) {
                std::ostringstream msg;
                msg << "fixed-point iteration diverges; measured step ratio " << ratio;
                throw NumericError(msg.str());
            }
        }
        run.increments.push_back(delta);
        if (!std::isfinite(delta)) throw NumericError("non-finite values in fixed-point iteration");
        if (delta <= tol * (1.0 - th.b)) return run;
        if (run.iterations >= max_iterations)
            throw NumericError("no convergence after " + std::to_string(run.iterations) + " iterations");
    }
}

/// Evaluates the fixed point at x through the self-affinity
/// g(x) = F_n(L_n^-1(x), g(L_n^-1(x))), unrolled `depth` times before
/// reading the samples. Exact at the knots; off the knots each level scales
/// the sampling error by |alpha_n|.
inline double fif_eval(const FifMaps& maps, const SampledFunction& g, double x, std::size_t depth = 8) {
    if (x <= maps.x0()) return maps.y0();
    if (x >= maps.xN()) return maps.yN();
    if (depth == 0) return g(x);
    const auto& xs = maps.data.x;
    const std::size_t n = static_cast<std::size_t>(std::lower_bound(xs.begin() + 1, xs.end(), x) - xs.begin());
    const FifPiece& p = maps.pieces[n - 1];
    const double u = x == xs[n] ? maps.xN() : p.L_inverse(x);
    return p.F(u, fif_eval(maps, g, u, depth - 1));
}

struct FactorSpec {
    InterpolationData data;
    std::vector<double> alphas;
};

struct ProductFif {
    std::vector<FifMaps> maps;
    std::vector<SampledFunction> factors;
    std::vector<std::size_t> iterations;

    std::size_t factor_count() const { return factors.size(); }

    /// g(x) = (g_1(x_1), ..., g_m(x_m)).
    std::vector<double> operator()(const std::vector<double>& x) const {
        if (x.size() != factors.size()) throw StructuralError("point must have one coordinate per factor");
        std::vector<double> out(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = fif_eval(maps[k], factors[k], x[k]);
        return out;
    }
};

inline ProductFif product_fif(const std::vector<FactorSpec>& per_factor, std::size_t m = 4096, double tol = 1e-8) {
    if (per_factor.empty()) throw StructuralError("product FIF needs at least one factor");
    ProductFif pf;
    for (const auto& factor : per_factor) {
        FifMaps maps = build_fif_maps(factor.data, factor.alphas);
        FifRun run = fif_fixed_point(maps, m, tol);
        pf.maps.push_back(std::move(maps));
        pf.factors.push_back(std::move(run.g));
        pf.iterations.push_back(run.iterations);
    }
    return pf;
}

/// Product operator: the factor operators applied componentwise.
inline std::vector<SampledFunction> product_rb_apply(const std::vector<FifMaps>& maps,
                                                     const std::vector<SampledFunction>& fs) {
    if (maps.size() != fs.size()) throw StructuralError("need one function per factor");
    std::vector<SampledFunction> out;
    for (std::size_t k = 0; k < fs.size(); ++k) out.push_back(rb_apply(maps[k], fs[k]));
    return out;
}

struct ProductResidual {
    std::vector<double> factor_residuals;
    double residual = 0.0;  ///< max over factors
};

/// How far one application of the product operator moves the factor fixed points.
inline ProductResidual product_residual(const ProductFif& pf) {
    const auto moved = product_rb_apply(pf.maps, pf.factors);
    ProductResidual r;
    for (std::size_t k = 0; k < moved.size(); ++k) {
        r.factor_residuals.push_back(sup_distance(moved[k], pf.factors[k]));
        r.residual = std::max(r.residual, r.factor_residuals.back());
    }
    return r;
}

struct NormReport {
    double norm_inf = 0.0;  ///< sup over the lattice of the Euclidean norm of (f_1(x_1), ..., f_m(x_m))
    double norm_0 = 0.0;    ///< sqrt(sum_k ||f_k||_inf^2)
    bool ok = false;        ///< norm_0 / sqrt(m) <= norm_inf <= norm_0 within 1e-9
    bool enumerated = false;
};

/// Both product norms on the sample lattice. The lattice is enumerated when
/// it has at most `lattice_cap` points; beyond that the supremum is taken
/// factorwise, which is exact because the coordinates vary independently.
inline NormReport norms_and_equivalence(const std::vector<SampledFunction>& fs, std::size_t lattice_cap = 10'000'000) {
    if (fs.empty()) throw StructuralError("need at least one factor");
    NormReport r;
    double acc = 0.0;
    double lattice = 1.0;
    std::vector<std::vector<double>> sq(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        const double s = fs[k].sup_norm();
        acc += s * s;
        lattice *= static_cast<double>(fs[k].values().size());
        for (double v : fs[k].values()) sq[k].push_back(v * v);
    }
    r.norm_0 = std::sqrt(acc);
    if (lattice <= static_cast<double>(lattice_cap)) {
        r.enumerated = true;
        std::vector<std::size_t> idx(fs.size(), 0);
        double best = 0.0;
        while (true) {
            double s = 0.0;
            for (std::size_t k = 0; k < fs.size(); ++k) s += sq[k][idx[k]];
            best = std::max(best, s);
            std::size_t j = fs.size();
            bool done = true;
            while (j-- > 0) {
                if (++idx[j] < sq[j].size()) {
                    done = false;
                    break;
                }
                idx[j] = 0;
            }
            if (done) break;
        }
        r.norm_inf = std::sqrt(best);
    } else {
        double s = 0.0;
        for (const auto& v : sq) s += *std::max_element(v.begin(), v.end());
        r.norm_inf = std::sqrt(s);
    }
    const double m = static_cast<double>(fs.size());
    r.ok = r.norm_0 / std::sqrt(m) <= r.norm_inf + 1e-9 && r.norm_inf <= r.norm_0 + 1e-9;
    return r;
}

/// sigma(i, j) = i - 1 when j = 0, else i.
inline std::size_t sigma(std::size_t i, std::size_t j) { return j == 0 ? i - 1 : i; }

struct JoinUpReport {
    bool ok = false;
    double max_error = 0.0;
    std::size_t checked = 0;  ///< corner evaluations
};

/// Checks that every product map sends every corner knot (j_k in {0, N_k})
/// to the sigma-indexed knot, componentwise, to 1e-12.
inline JoinUpReport join_up_check(const std::vector<FifMaps>& factors) {
    if (factors.empty()) throw StructuralError("need at least one factor");
    const std::size_t m = factors.size();
    JoinUpReport r;
    // Odometer over (i_k, corner_k) with i_k in 1..N_k and corner_k in {0, 1}.
    std::vector<std::size_t> i(m, 1), corner(m, 0);
    while (true) {
        for (std::size_t k = 0; k < m; ++k) {
            const auto& f = factors[k];
            const std::size_t n = f.intervals();
            const std::size_t j = corner[k] == 0 ? 0 : n;
            const FifPiece& p = f.pieces[i[k] - 1];
            const double xs = p.L(f.data.x[j]);
            const double ys = p.F(f.data.x[j], f.data.y[j]);
            const std::size_t t = sigma(i[k], j);
            const double ex = std::abs(xs - f.data.x[t]) / endpoint_scale(f.data.x[t]);
            const double ey = std::abs(ys - f.data.y[t]) / endpoint_scale(f.data.y[t]);
            r.max_error = std::max({r.max_error, ex, ey});
        }
        ++r.checked;
        std::size_t k = m;
        bool done = true;
        while (k-- > 0) {
            if (corner[k] == 0) {
                corner[k] = 1;
                done = false;
                break;
            }
            corner[k] = 0;
            if (i[k] < factors[k].intervals()) {
                ++i[k];
                done = false;
                break;
            }
            i[k] = 1;
        }
        if (done) break;
    }
    r.ok = r.max_error <= kEndpointTol;
    return r;
}

}  // namespace fractal
