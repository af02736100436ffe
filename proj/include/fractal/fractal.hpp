/**
 * @file fractal.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "fractal/affine_map.hpp"
#include "fractal/catalog.hpp"
#include "fractal/dimension.hpp"
#include "fractal/errors.hpp"
#include "fractal/fif.hpp"
#include "fractal/ifs.hpp"
#include "fractal/inhomogeneous.hpp"
#include "fractal/io.hpp"
#include "fractal/metric.hpp"
#include "fractal/point_cloud.hpp"
#include "fractal/render.hpp"
#include "fractal/spatial.hpp"
#include "fractal/verify.hpp"
