#pragma once

#include "strandkit/common.hpp"
#include "strandkit/scalp.hpp"

#include <vector>

namespace strandkit {

// Per-texel probability of a strand growing there; flat index y*R + x.
struct DensityMap {
  int resolution = kTextureResolution;
  Eigen::ArrayXf values;

  static DensityMap zeros(int resolution) {
    return {resolution, Eigen::ArrayXf::Zero(static_cast<Eigen::Index>(resolution) * resolution)};
  }
  float at(int x, int y) const { return values[static_cast<Eigen::Index>(y) * resolution + x]; }
  float& at(int x, int y) { return values[static_cast<Eigen::Index>(y) * resolution + x]; }
};

// Throws unless values lie in [0, 1], are zero off the mask, and sizes agree.
void validate(const DensityMap& density, const ScalpMask& mask);

// Bilinear interpolation of the density at uv (texel centers as samples,
// clamped at the border).
double bilinear_density(const DensityMap& density, const Vec2& uv);

// Draws n root positions: a texel from the categorical distribution
// proportional to density over masked texels, then a uniform position inside
// it. Jitter that would leave the chart disk is redrawn.
std::vector<Vec2> sample_roots(const DensityMap& density, const ScalpMask& mask, std::size_t n,
                               Rng& rng);

// 3x3 box blur restricted to the mask, renormalized to max 1.
DensityMap box_blur(const DensityMap& density, const ScalpMask& mask);

}  // namespace strandkit
