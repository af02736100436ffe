/**
 * @file render.hpp
 * @brief Binary PPM rendering of planar point clouds.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fractal/errors.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

struct Viewport {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

/// Black-on-white raster; `ink[row * width + col]` is set for black pixels.
/// Row 0 is the top of the image.
struct Image {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> ink;

    std::size_t black_pixels() const {
        std::size_t n = 0;
        for (auto v : ink) n += v;
        return n;
    }

    /// P6 byte stream.
    std::string ppm() const {
        std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        out.reserve(out.size() + ink.size() * 3);
        for (auto v : ink) out.append(3, v ? '\0' : '\xff');
        return out;
    }

    void write_ppm(std::ostream& out) const {
        const std::string bytes = ppm();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
};

/// Pixel (row, col) is black iff some point falls in its viewport cell.
/// Clouds that are not planar need `axes` naming the two coordinates shown.
inline Image render(const PointCloud& cloud, const Viewport& view, std::size_t width, std::size_t height,
                    std::optional<std::pair<std::size_t, std::size_t>> axes = std::nullopt) {
    if (width < 16 || height < 16) throw ContractError("render dimensions must be at least 16 pixels");
    if (!(view.x_max > view.x_min) || !(view.y_max > view.y_min)) throw ContractError("viewport must be nonempty");
    if (!axes) {
        if (cloud.dimension() != 2) throw ContractError("rendering a non-planar cloud needs a projection axis pair");
        axes = std::make_pair(std::size_t{0}, std::size_t{1});
    }
    if (axes->first >= cloud.dimension() || axes->second >= cloud.dimension())
        throw ContractError("projection axis out of range");
    Image img{width, height, std::vector<std::uint8_t>(width * height, 0)};
    const double sx = static_cast<double>(width) / (view.x_max - view.x_min);
    const double sy = static_cast<double>(height) / (view.y_max - view.y_min);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        const double x = p[axes->first], y = p[axes->second];
        if (x < view.x_min || x > view.x_max || y < view.y_min || y > view.y_max) continue;
        auto col = static_cast<std::size_t>(std::floor((x - view.x_min) * sx));
        auto row = static_cast<std::size_t>(std::floor((view.y_max - y) * sy));
        if (col >= width) col = width - 1;
        if (row >= height) row = height - 1;
        img.ink[row * width + col] = 1;
    }
    return img;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fractal
