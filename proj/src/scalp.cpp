#include "strandkit/scalp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace strandkit {

void ScalpSurface::validate() const {
  require((radii.array() > 0.0).all(), ErrorCode::invalid_argument,
          "scalp surface radii must be positive");
  require(cap_angle > 0.0 && cap_angle < kPi / 2, ErrorCode::invalid_argument,
          "scalp cap angle must lie in (0, pi/2)");
}

namespace {

RootFrame frame_at(const ScalpSurface& s, const Vec3& point) {
  RootFrame f;
  f.origin = point;
  f.normal = ((point - s.center).array() / s.radii.array().square()).matrix().normalized();
  // Project world +x into the tangent plane. Inside the cap the normal has a
  // positive z component, so this never degenerates.
  f.tangent = (Vec3::UnitX() - Vec3::UnitX().dot(f.normal) * f.normal).normalized();
  f.bitangent = f.normal.cross(f.tangent);
  return f;
}

}  // namespace

RootFrame uv_to_world(const ScalpSurface& surface, const Vec2& uv) {
  const Vec2 d = uv - Vec2(0.5, 0.5);
  const double rho = d.norm();
  if (!(rho <= 0.5 + 1e-12))
    throw Error(ErrorCode::out_of_chart, "uv (" + std::to_string(uv.x()) + ", " +
                                             std::to_string(uv.y()) + ") is outside the scalp chart");
  const double theta = std::min(rho, 0.5) / 0.5 * surface.cap_angle;
  const double phi = rho > 0.0 ? std::atan2(d.y(), d.x()) : 0.0;
  const Vec3 unit(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                  std::cos(theta));
  return frame_at(surface, surface.center + (unit.array() * surface.radii.array()).matrix());
}

Vec2 world_to_uv(const ScalpSurface& surface, const Vec3& p) {
  const Vec3 q = ((p - surface.center).array() / surface.radii.array()).matrix();
  const double planar = std::hypot(q.x(), q.y());
  require(planar > 0.0 || q.z() > 0.0, ErrorCode::out_of_chart,
          "world_to_uv: point does not project onto the scalp cap");
  const double theta = std::atan2(planar, q.z());
  if (theta > surface.cap_angle + kCapSlack)
    throw Error(ErrorCode::out_of_chart, "world_to_uv: point is " + std::to_string(theta) +
                                             " rad from the pole, beyond the cap");
  const double rho = 0.5 * std::min(theta / surface.cap_angle, 1.0);
  const double phi = std::atan2(q.y(), q.x());
  return {0.5 + rho * std::cos(phi), 0.5 + rho * std::sin(phi)};
}

double signed_distance(const ScalpSurface& surface, const Vec3& p) {
  const Vec3 q = ((p - surface.center).array() / surface.radii.array()).matrix();
  return surface.radii.minCoeff() * (q.norm() - 1.0);
}

Vec3 signed_distance_gradient(const ScalpSurface& surface, const Vec3& p) {
  const Vec3 q = ((p - surface.center).array() / surface.radii.array()).matrix();
  const double n = q.norm();
  if (n == 0.0) return Vec3::Zero();
  return surface.radii.minCoeff() * (q.array() / surface.radii.array()).matrix() / n;
}

std::size_t ScalpMask::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

ScalpMask make_scalp_mask(int resolution) {
  require(resolution >= 1, ErrorCode::invalid_argument, "mask resolution must be positive");
  ScalpMask mask;
  mask.resolution = resolution;
  mask.valid.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  for (int y = 0; y < resolution; ++y)
    for (int x = 0; x < resolution; ++x)
      mask.valid[static_cast<std::size_t>(y) * resolution + x] =
          in_chart(texel_center(x, y, resolution)) ? 1 : 0;
  return mask;
}

std::array<int, 2> texel_of(const Vec2& uv, int resolution) {
  auto idx = [resolution](double c) {
    return std::clamp(static_cast<int>(std::floor(c * resolution)), 0, resolution - 1);
  };
  return {idx(uv.x()), idx(uv.y())};
}

RootFrame ScalpMesh::uv_to_world(const Vec2& uv) const {
  std::vector<Vec3> normals(positions.size(), Vec3::Zero());
  for (const auto& t : triangles) {
    const Vec3 n = (positions[t[1]] - positions[t[0]]).cross(positions[t[2]] - positions[t[0]]);
    for (int k : t) normals[k] += n;
  }

  for (const auto& t : triangles) {
    const Vec2 a = uvs[t[0]], b = uvs[t[1]], c = uvs[t[2]];
    Eigen::Matrix2d m;
    m << b - a, c - a;
    const double det = m.determinant();
    if (std::abs(det) < 1e-300) continue;
    const Vec2 bc = m.inverse() * (uv - a);
    const double w1 = bc.x(), w2 = bc.y(), w0 = 1.0 - w1 - w2;
    constexpr double tol = -1e-12;
    if (w0 < tol || w1 < tol || w2 < tol) continue;

    RootFrame f;
    f.origin = w0 * positions[t[0]] + w1 * positions[t[1]] + w2 * positions[t[2]];
    f.normal = (w0 * normals[t[0]].normalized() + w1 * normals[t[1]].normalized() +
                w2 * normals[t[2]].normalized())
                   .normalized();
    // dP/du from the triangle's affine map.
    Eigen::Matrix<double, 3, 2> e;
    e << positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]];
    const Vec3 dpdu = e * m.inverse().col(0);
    Vec3 tangent = dpdu - dpdu.dot(f.normal) * f.normal;
    if (tangent.norm() < 1e-300) tangent = f.normal.unitOrthogonal();
    f.tangent = tangent.normalized();
    f.bitangent = f.normal.cross(f.tangent);
    return f;
  }
  throw Error(ErrorCode::out_of_chart, "uv is not covered by any scalp mesh triangle");
}

ScalpMesh read_scalp_ply(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);

  std::string line;
  std::getline(in, line);
  require(line.rfind("ply", 0) == 0, ErrorCode::bad_magic, path + ": not a PLY file");

  std::size_t vertex_count = 0, face_count = 0;
  std::vector<std::string> vertex_props;
  std::string current;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::size_t n = 0;
      ls >> current >> n;
      if (current == "vertex") vertex_count = n;
      if (current == "face") face_count = n;
    } else if (word == "property" && current == "vertex") {
      std::string type, name;
      ls >> type >> name;
      vertex_props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  require(ascii, ErrorCode::parse, path + ": only ASCII PLY is supported");

  auto column = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) {
      auto it = std::find(vertex_props.begin(), vertex_props.end(), n);
      if (it != vertex_props.end()) return static_cast<int>(it - vertex_props.begin());
    }
    throw Error(ErrorCode::parse, path + ": missing vertex property " + *names.begin());
  };
  const int cx = column({"x"}), cy = column({"y"}), cz = column({"z"});
  const int cu = column({"u", "s", "texture_u"}), cv = column({"v", "t", "texture_v"});

  ScalpMesh mesh;
  std::vector<double> values(vertex_props.size());
  for (std::size_t i = 0; i < vertex_count; ++i) {
    for (auto& v : values) require(static_cast<bool>(in >> v), ErrorCode::truncated, path + ": truncated vertex list");
    mesh.positions.emplace_back(values[cx], values[cy], values[cz]);
    mesh.uvs.emplace_back(values[cu], values[cv]);
  }
  for (std::size_t i = 0; i < face_count; ++i) {
    int n = 0;
    require(static_cast<bool>(in >> n) && n >= 3, ErrorCode::truncated, path + ": truncated face list");
    std::vector<int> idx(n);
    for (auto& k : idx) {
      require(static_cast<bool>(in >> k), ErrorCode::truncated, path + ": truncated face list");
      require(k >= 0 && static_cast<std::size_t>(k) < vertex_count, ErrorCode::parse,
              path + ": face index out of range");
    }
    for (int k = 1; k + 1 < n; ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
  }
  return mesh;
}

}  // namespace strandkit
