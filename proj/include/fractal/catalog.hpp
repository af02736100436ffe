/**
 * @file catalog.hpp
 * @brief Standard systems used by the demos, the verification battery and
 *        the tests.
 */
#pragma once

#include <vector>

#include "fractal/affine_map.hpp"
#include "fractal/ifs.hpp"
#include "fractal/inhomogeneous.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal::catalog {

/// Maps x -> scale * x + offset_i on the line.
inline IfsSystem line_similarities(double scale, const std::vector<double>& offsets, std::string label) {
    std::vector<AffineMap> maps;
    for (double t : offsets) maps.push_back(AffineMap::similarity(scale, {t}));
    return IfsSystem(std::move(maps), std::move(label));
}

/// x/3, x/3 + 2/3: the middle-third Cantor set.
inline IfsSystem middle_third_cantor() { return line_similarities(1.0 / 3.0, {0.0, 2.0 / 3.0}, "cantor"); }

/// x/2, x/2 + 1/2: attractor [0, 1].
inline IfsSystem interval_halves() { return line_similarities(0.5, {0.0, 0.5}, "halves"); }

/// y/6, y/6 + 3/6, y/6 + 5/6.
inline IfsSystem sixth_cantor() { return line_similarities(1.0 / 6.0, {0.0, 3.0 / 6.0, 5.0 / 6.0}, "sixth-cantor"); }

/// x/2, x/2 + 1/4: images of [0, 1] overlap.
inline IfsSystem overlapping_halves() { return line_similarities(0.5, {0.0, 0.25}, "overlapping-halves"); }

/// 0.6 x, 0.6 x + 0.4.
inline IfsSystem overlapping_sixtenths() { return line_similarities(0.6, {0.0, 0.4}, "overlapping-0.6"); }

/// x/2, x/2 + 1/4, x/2 + 1/2.
inline IfsSystem overlapping_triple() { return line_similarities(0.5, {0.0, 0.25, 0.5}, "overlapping-triple"); }

/// x/4, x/4 + 3/4.
inline IfsSystem quarter_cantor() { return line_similarities(0.25, {0.0, 0.75}, "quarter-cantor"); }

/// Single map x/2 with fixed point 0.
inline IfsSystem halving() { return line_similarities(0.5, {0.0}, "halving"); }

/// Sierpinski triangle on (0,0), (1,0), (1/2,1).
inline IfsSystem sierpinski_triangle() {
    return IfsSystem({AffineMap::similarity(0.5, {0.0, 0.0}), AffineMap::similarity(0.5, {0.5, 0.0}),
                      AffineMap::similarity(0.5, {0.25, 0.5})},
                     "sierpinski");
}

/// Cantor maps with scale 1/3 in one factor and 1/2 in the other.
inline ProductIfs third_by_half() {
    return make_product_ifs({middle_third_cantor(), line_similarities(0.5, {0.0, 0.5}, "halves")});
}

/// [0, 1] times the 1/6 Cantor-like set.
inline ProductIfs interval_by_sixth_cantor() { return make_product_ifs({interval_halves(), sixth_cantor()}); }

inline ProductIfs cantor_by_cantor() { return make_product_ifs({middle_third_cantor(), middle_third_cantor()}); }

/// Cantor maps with condensation set a net of [4/9, 5/9] of the given spacing.
inline CondensedIfs cantor_with_gap_block(double spacing) {
    return CondensedIfs(middle_third_cantor(), PointCloud::grid({4.0 / 9.0}, {5.0 / 9.0}, spacing));
}

/// x/2 with condensation set {1}; the attractor is {0} u {2^-k : k >= 0}.
inline CondensedIfs halving_with_one() { return CondensedIfs(halving(), PointCloud(1, {1.0})); }

/// Sierpinski maps with a sampled circle of the given radius about the
/// centroid as condensation set.
inline CondensedIfs sierpinski_with_circle(double radius, std::size_t samples) {
    std::vector<double> flat;
    const double cx = 0.5, cy = 1.0 / 3.0;
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(samples);
        flat.push_back(cx + radius * std::cos(t));
        flat.push_back(cy + radius * std::sin(t));
    }
    // Half the chord between neighbouring samples bounds the distance to the circle.
    const double eps = radius * std::sin(pi / static_cast<double>(samples));
    return CondensedIfs(sierpinski_triangle(), PointCloud(2, std::move(flat), eps));
}

/// Left endpoints of the level-`depth` intervals of the attractor of a
/// line IFS: W^depth({0}). Each level-k interval with k <= depth holds
/// its left end and no point of any other interval.
inline PointCloud left_endpoints(const IfsSystem& sys, std::size_t depth) {
    PointCloud seed(1, {0.0}, 1.0);
    return iterate_hutchinson(sys, seed, depth);
}

}  // namespace fractal::catalog
