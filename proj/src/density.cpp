#include "strandkit/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace strandkit {

void validate(const DensityMap& density, const ScalpMask& mask) {
  require(density.resolution == mask.resolution &&
              density.values.size() == static_cast<Eigen::Index>(mask.texel_count()),
          ErrorCode::sizing, "density map and mask sizes disagree");
  for (Eigen::Index i = 0; i < density.values.size(); ++i) {
    const float v = density.values[i];
    require(v >= 0.0f && v <= 1.0f, ErrorCode::invalid_argument, "density value outside [0, 1]");
    require(mask.at(static_cast<std::size_t>(i)) || v == 0.0f, ErrorCode::invalid_argument,
            "density is nonzero outside the scalp mask");
  }
}

double bilinear_density(const DensityMap& density, const Vec2& uv) {
  const int r = density.resolution;
  const double fx = std::clamp(uv.x() * r - 0.5, 0.0, r - 1.0);
  const double fy = std::clamp(uv.y() * r - 0.5, 0.0, r - 1.0);
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, r - 1), y1 = std::min(y0 + 1, r - 1);
  const double tx = fx - x0, ty = fy - y0;
  return (1 - ty) * ((1 - tx) * density.at(x0, y0) + tx * density.at(x1, y0)) +
         ty * ((1 - tx) * density.at(x0, y1) + tx * density.at(x1, y1));
}

std::vector<Vec2> sample_roots(const DensityMap& density, const ScalpMask& mask, std::size_t n,
                               Rng& rng) {
  require(n >= 1, ErrorCode::invalid_argument, "sample_roots: n must be >= 1");
  require(density.resolution == mask.resolution, ErrorCode::sizing,
          "sample_roots: density and mask resolutions differ");

  std::vector<std::uint32_t> texels;
  std::vector<double> cdf;
  for (std::size_t i = 0; i < mask.texel_count(); ++i) {
    const double w = mask.at(i) ? static_cast<double>(density.values[static_cast<Eigen::Index>(i)]) : 0.0;
    if (w > 0.0) {
      texels.push_back(static_cast<std::uint32_t>(i));
      cdf.push_back(w);
    }
  }
  require(!texels.empty(), ErrorCode::degenerate, "sample_roots: density is zero on the whole mask");
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double total = cdf.back();

  const int r = mask.resolution;
  std::vector<Vec2> roots;
  roots.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * total);
    const std::uint32_t texel = texels[std::min<std::size_t>(it - cdf.begin(), texels.size() - 1)];
    const int x = static_cast<int>(texel % r), y = static_cast<int>(texel / r);
    Vec2 uv = texel_center(x, y, r);
    for (int attempt = 0; attempt < 32; ++attempt) {
      const Vec2 jittered((x + rng.uniform()) / r, (y + rng.uniform()) / r);
      if (in_chart(jittered)) {
        uv = jittered;
        break;
      }
    }
    roots.push_back(uv);
  }
  return roots;
}

DensityMap box_blur(const DensityMap& density, const ScalpMask& mask) {
  const int r = density.resolution;
  DensityMap out = DensityMap::zeros(r);
  for (int y = 0; y < r; ++y)
    for (int x = 0; x < r; ++x) {
      if (!mask.at(x, y)) continue;
      double sum = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= r || yy >= r || !mask.at(xx, yy)) continue;
          sum += density.at(xx, yy);
          ++count;
        }
      out.at(x, y) = static_cast<float>(sum / count);
    }
  const float peak = out.values.maxCoeff();
  if (peak > 0.0f) out.values = (out.values / peak).min(1.0f);
  return out;
}

}  // namespace strandkit
