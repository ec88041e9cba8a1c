#include "strandkit/texture.hpp"

#include <array>
#include <limits>
#include <sstream>

namespace strandkit {

BakeResult bake(const Hairstyle& hair, const CodecModel& codec, const ScalpSurface& surface,
                const BakeOptions& options) {
  validate(hair);
  const int r = options.resolution;
  const std::size_t texels = std::size_t(r) * r;
  const std::size_t n = hair.size();

  std::vector<Vec2> uv(n);
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      uv[i] = world_to_uv(surface, hair.strands[i].row(0).transpose());
    } catch (const Error&) {
      bad.push_back(i);
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "bake: " << bad.size() << " strand roots outside the scalp chart:";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k) msg << ' ' << bad[k];
    if (bad.size() > 20) msg << " ...";
    throw Error(ErrorCode::out_of_chart, msg.str());
  }

  // Among strands sharing a texel the one with the smallest hash wins: a
  // uniform random choice that does not depend on visiting order.
  std::vector<std::uint32_t> count(texels, 0);
  std::vector<std::uint64_t> best_key(texels, std::numeric_limits<std::uint64_t>::max());
  std::vector<std::int64_t> winner(texels, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = texel_of(uv[i], r);
    const std::size_t t = std::size_t(y) * r + x;
    ++count[t];
    const std::uint64_t key = hash_combine(options.seed, t, i);
    if (key < best_key[t]) {
      best_key[t] = key;
      winner[t] = static_cast<std::int64_t>(i);
    }
  }

  BakeResult out;
  out.texture = ScalpTexture::empty(r, kLatentDim);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(texels); ++t) {
    if (winner[t] < 0) continue;
    const std::size_t i = static_cast<std::size_t>(winner[t]);
    const LatentCode z = encode(codec, hair.strands[i], uv_to_world(surface, uv[i]));
    out.texture.data.row(t) = z.transpose().cast<float>();
    out.texture.valid[t] = 1;
  }

  const std::uint32_t peak = *std::max_element(count.begin(), count.end());
  out.density = DensityMap::zeros(r);
  for (std::size_t t = 0; t < texels; ++t)
    out.density.values[static_cast<Eigen::Index>(t)] =
        std::clamp(static_cast<float>(double(count[t]) / peak), 0.0f, 1.0f);
  if (options.blur_density) out.density = box_blur(out.density, make_scalp_mask(r));
  return out;
}

LatentCode fetch_latent(const ScalpTexture& texture, const Vec2& uv) {
  const int r = texture.resolution;
  const double fx = std::clamp(uv.x() * r - 0.5, 0.0, r - 1.0);
  const double fy = std::clamp(uv.y() * r - 0.5, 0.0, r - 1.0);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, r - 1), y1 = std::min(y0 + 1, r - 1);
  const double tx = fx - x0, ty = fy - y0;

  const std::array<std::pair<Eigen::Index, double>, 4> taps = {{
      {Eigen::Index(y0) * r + x0, (1 - tx) * (1 - ty)},
      {Eigen::Index(y0) * r + x1, tx * (1 - ty)},
      {Eigen::Index(y1) * r + x0, (1 - tx) * ty},
      {Eigen::Index(y1) * r + x1, tx * ty},
  }};
  LatentCode z = LatentCode::Zero();
  double total = 0.0;
  for (const auto& [index, w] : taps) {
    if (!texture.valid[static_cast<std::size_t>(index)] || w == 0.0) continue;
    z += w * texture.data.row(index).transpose().cast<double>();
    total += w;
  }
  require(total > 0.0, ErrorCode::out_of_chart, "fetch_latent: no valid texel around uv");
  return z / total;
}

Hairstyle decode_roots(const ScalpTexture& texture, const std::vector<Vec2>& roots,
                       const CodecModel& codec, const ScalpSurface& surface) {
  require(texture.channels == kLatentDim, ErrorCode::sizing, "decode: texture channel count mismatch");
  Hairstyle hair;
  hair.strands.resize(roots.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(roots.size()); ++i)
    hair.strands[i] = decode(codec, fetch_latent(texture, roots[i]), uv_to_world(surface, roots[i]));
  return hair;
}

Hairstyle decode_hairstyle(const ScalpTexture& texture, const DensityMap& density, std::size_t n,
                           const CodecModel& codec, const ScalpSurface& surface, Rng& rng) {
  const auto roots = sample_roots(density, make_scalp_mask(texture.resolution), n, rng);
  return decode_roots(texture, roots, codec, surface);
}

}  // namespace strandkit
