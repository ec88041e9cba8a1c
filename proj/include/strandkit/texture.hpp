#pragma once

#include "strandkit/codec.hpp"
#include "strandkit/density.hpp"
#include "strandkit/scalp.hpp"
#include "strandkit/strand.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace strandkit {

// Grid of latent codes over the scalp chart. `data` has one row per texel
// (flat index y*R + x) and one column per channel.
template <typename Scalar>
struct ScalpTextureT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  int resolution = kTextureResolution;
  int channels = kLatentDim;
  Matrix data;
  std::vector<std::uint8_t> valid;

  static ScalpTextureT empty(int resolution, int channels) {
    ScalpTextureT t;
    t.resolution = resolution;
    t.channels = channels;
    const Eigen::Index n = static_cast<Eigen::Index>(resolution) * resolution;
    t.data = Matrix::Zero(n, channels);
    t.valid.assign(static_cast<std::size_t>(n), 0);
    return t;
  }
  Eigen::Index texel_count() const { return data.rows(); }
  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
  }
};
using ScalpTexture = ScalpTextureT<float>;

namespace detail {

template <typename Scalar>
struct PyramidLevel {
  int size = 0;
  typename ScalpTextureT<Scalar>::Matrix values;
  std::vector<std::uint8_t> filled;
};

// Row r of `level` sampled at the fine texel (x, y) of the level below,
// bilinear with clamped borders. std::lerp keeps constants exact and results
// inside the range of the inputs.
template <typename Scalar, typename Row>
void upsample_into(const PyramidLevel<Scalar>& coarse, int x, int y, Row&& out) {
  const int n = coarse.size;
  const double fx = std::clamp((x + 0.5) / 2.0 - 0.5, 0.0, n - 1.0);
  const double fy = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, n - 1.0);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, n - 1), y1 = std::min(y0 + 1, n - 1);
  const Scalar tx = static_cast<Scalar>(fx - x0), ty = static_cast<Scalar>(fy - y0);
  const auto& v = coarse.values;
  const Eigen::Index i00 = Eigen::Index(y0) * n + x0, i10 = Eigen::Index(y0) * n + x1;
  const Eigen::Index i01 = Eigen::Index(y1) * n + x0, i11 = Eigen::Index(y1) * n + x1;
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const Scalar top = std::lerp(v(i00, c), v(i10, c), tx);
    const Scalar bottom = std::lerp(v(i01, c), v(i11, c), tx);
    out[c] = std::lerp(top, bottom, ty);
  }
}

}  // namespace detail

// Pull-push hole filling.
//
// Pull: each coarser level averages the filled children of every 2x2 block
// (accumulated in double); a block with no filled child stays empty. Push:
// from the 1x1 top down, every empty texel takes the bilinear upsample of the
// level above. Originally valid texels are never written. At full resolution
// only masked texels are filled; everything else is passed through.
template <typename Scalar>
ScalpTextureT<Scalar> push_pull(const ScalpTextureT<Scalar>& raw, const ScalpMask& mask) {
  require(raw.resolution == mask.resolution, ErrorCode::sizing,
          "push_pull: texture and mask resolutions differ");
  require(std::find(raw.valid.begin(), raw.valid.end(), std::uint8_t{1}) != raw.valid.end(),
          ErrorCode::degenerate, "push_pull: texture has no valid texel");

  std::vector<detail::PyramidLevel<Scalar>> levels;
  levels.push_back({raw.resolution, raw.data, raw.valid});

  while (levels.back().size > 1) {
    const auto& fine = levels.back();
    const int fn = fine.size, cn = (fn + 1) / 2;
    detail::PyramidLevel<Scalar> coarse{cn, ScalpTextureT<Scalar>::Matrix::Zero(Eigen::Index(cn) * cn, raw.channels),
                                        std::vector<std::uint8_t>(std::size_t(cn) * cn, 0)};
    Eigen::RowVectorXd acc(raw.channels);
#pragma omp parallel for schedule(static) firstprivate(acc)
    for (int y = 0; y < cn; ++y)
      for (int x = 0; x < cn; ++x) {
        acc.setZero();
        int count = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int xx = 2 * x + dx, yy = 2 * y + dy;
            if (xx >= fn || yy >= fn) continue;
            const Eigen::Index i = Eigen::Index(yy) * fn + xx;
            if (!fine.filled[i]) continue;
            acc += fine.values.row(i).template cast<double>();
            ++count;
          }
        if (count == 0) continue;
        const Eigen::Index o = Eigen::Index(y) * cn + x;
        coarse.values.row(o) = (acc / count).template cast<Scalar>();
        coarse.filled[o] = 1;
      }
    levels.push_back(std::move(coarse));
  }

  for (std::size_t k = levels.size() - 1; k-- > 0;) {
    auto& level = levels[k];
    const auto& above = levels[k + 1];
    const int n = level.size;
    const bool finest = k == 0;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const Eigen::Index i = Eigen::Index(y) * n + x;
        if (level.filled[i] || (finest && !mask.at(x, y))) continue;
        detail::upsample_into(above, x, y, level.values.row(i));
        level.filled[i] = 1;
      }
  }

  ScalpTextureT<Scalar> out = raw;
  out.data = std::move(levels[0].values);
  out.valid = std::move(levels[0].filled);
  return out;
}

struct BakeResult {
  ScalpTexture texture;
  DensityMap density;
};

struct BakeOptions {
  int resolution = kTextureResolution;
  std::uint64_t seed = 0;  // picks the winner among strands sharing a texel
  bool blur_density = false;
};

// Encodes every strand into the texel under its root. Density is the root
// count per texel divided by the maximum count.
BakeResult bake(const Hairstyle& hair, const CodecModel& codec, const ScalpSurface& surface,
                const BakeOptions& options = {});

// Bilinear latent lookup; weights of invalid texels are dropped and the rest
// renormalized.
LatentCode fetch_latent(const ScalpTexture& texture, const Vec2& uv);

// Decodes one strand per root uv.
Hairstyle decode_roots(const ScalpTexture& texture, const std::vector<Vec2>& roots,
                       const CodecModel& codec, const ScalpSurface& surface);

Hairstyle decode_hairstyle(const ScalpTexture& texture, const DensityMap& density, std::size_t n,
                           const CodecModel& codec, const ScalpSurface& surface, Rng& rng);

}  // namespace strandkit
