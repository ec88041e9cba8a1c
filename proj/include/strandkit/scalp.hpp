#pragma once

#include "strandkit/common.hpp"
#include "strandkit/strand.hpp"

#include <array>
#include <string>
#include <vector>

namespace strandkit {

constexpr int kTextureResolution = 256;

// Ellipsoidal head with a polar scalp cap around +z.
//
// The cap is charted azimuthal-equidistantly: the parametric polar angle
// theta in [0, cap_angle] maps linearly to the chart radius in [0, 0.5]
// around uv = (0.5, 0.5), and the azimuth maps to the chart angle. The chart
// is therefore the closed disk of radius 0.5 inscribed in the unit square.
struct ScalpSurface {
  Vec3 center = Vec3(0.0, 0.0, 0.0);
  Vec3 radii = Vec3(0.078, 0.095, 0.088);
  double cap_angle = 1.15;

  void validate() const;
};

struct RootFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 tangent = Vec3::UnitX();
  Vec3 bitangent = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();

  // Columns are (tangent, bitangent, normal): local -> world rotation.
  Mat3 rotation() const {
    Mat3 r;
    r << tangent, bitangent, normal;
    return r;
  }
  Vec3 to_world(const Vec3& local) const { return origin + rotation() * local; }
  Vec3 to_local(const Vec3& world) const { return rotation().transpose() * (world - origin); }
};

// Chart-domain predicate. Independent of the surface parameters.
inline bool in_chart(const Vec2& uv, double slack = 0.0) {
  return (uv - Vec2(0.5, 0.5)).norm() <= 0.5 + slack;
}

// Polar-angle tolerance of world_to_uv. Shrinkwrap lifts boundary roots
// along the gradient, which can nudge them a hair past the cap; such points
// clamp onto the chart edge.
constexpr double kCapSlack = 2e-3;

RootFrame uv_to_world(const ScalpSurface& surface, const Vec2& uv);
Vec2 world_to_uv(const ScalpSurface& surface, const Vec3& p);

// Scaled-sphere approximation: min(radii) * (|(p - c) / radii| - 1).
// Exact on the surface and at the center, monotone along rays from the center,
// and never overestimates the true distance outside the ellipsoid.
double signed_distance(const ScalpSurface& surface, const Vec3& p);
Vec3 signed_distance_gradient(const ScalpSurface& surface, const Vec3& p);

// Texel (x, y) covers [x/R, (x+1)/R) x [y/R, (y+1)/R); flat index y*R + x.
struct ScalpMask {
  int resolution = kTextureResolution;
  std::vector<std::uint8_t> valid;

  bool at(int x, int y) const { return valid[static_cast<std::size_t>(y) * resolution + x] != 0; }
  bool at(std::size_t index) const { return valid[index] != 0; }
  std::size_t texel_count() const { return valid.size(); }
  std::size_t valid_count() const;
};

ScalpMask make_scalp_mask(int resolution = kTextureResolution);

inline Vec2 texel_center(int x, int y, int resolution) {
  return Vec2((x + 0.5) / resolution, (y + 0.5) / resolution);
}

// Texel containing uv; uv == 1 lands in the last texel.
std::array<int, 2> texel_of(const Vec2& uv, int resolution);

// Externally unwrapped scalp: triangle mesh with per-vertex uv.
struct ScalpMesh {
  std::vector<Vec3> positions;
  std::vector<Vec2> uvs;
  std::vector<std::array<int, 3>> triangles;

  // Barycentric interpolation in the uv triangle containing `uv`. The normal
  // is the interpolated vertex normal; the tangent follows increasing u.
  RootFrame uv_to_world(const Vec2& uv) const;
};

// ASCII PLY with vertex properties x, y, z, u, v (s/t accepted as aliases)
// and a face list.
ScalpMesh read_scalp_ply(const std::string& path);

}  // namespace strandkit
